"""Bridge server package: protocol loop plus scikit-learn-backed explainers."""

__version__ = "0.1.0"
