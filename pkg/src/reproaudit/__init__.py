"""reproaudit: audit LLM outputs for reproductions of reference texts."""

__version__ = "0.1.0"
