"""frzextract: one-shot export of frozen transformer hidden states to FRZF."""

__version__ = "0.1.0"
