"""proc2bpmn-annotator: raw narrative text -> annotation interchange JSON."""

__version__ = "0.1.0"
