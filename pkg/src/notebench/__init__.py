"""notebench: concordance benchmarking for paired machine/clinician SOAP notes."""

__version__ = "0.1.0"
