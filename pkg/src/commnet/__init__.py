"""E-mail communication network metrics and leaver/stayer analysis."""

__version__ = "0.1.0"
