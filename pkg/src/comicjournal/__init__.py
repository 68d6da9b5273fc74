"""Conversational journaling engine that draws four-panel comic strips."""

__version__ = "0.1.0"
