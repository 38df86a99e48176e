"""proc2bpmn: annotated process narratives -> process table -> BPMN 2.0."""

from .annotation import (
    AnnotatedDocument,
    CorefChain,
    EntitySpan,
    Token,
    parse_annotation_json,
    parse_conllu,
    serialize_annotation_json,
    serialize_conllu,
    validate_document,
)
from .bpmn import BpmnModel, build_model, layout, serialize_xml, validate_model
from .coreference import (
    AliasMap,
    Mention,
    Resolution,
    apply_substitutions,
    collect_mentions,
    detect_aliases,
    participant_candidates,
    resolve_anaphora,
)
from .extraction import (
    ConditionAttachment,
    Participant,
    ParticipantRegistry,
    SvoTriple,
    detect_termination,
    extract_conditions,
    extract_participants,
    extract_svo,
)
from .lexicon import Descriptor, KeywordType, Lexicon, VerbType, load_lexicon
from .process_table import (
    OrderLabel,
    ProcessTable,
    TableRow,
    build_table,
    format_activity,
    parse_csv,
    parse_order_label,
    serialize_csv,
    validate_table,
)

__version__ = "0.1.0"
