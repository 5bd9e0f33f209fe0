"""Cross-modal embedding association tests for vision-language models."""

__version__ = "0.1.0"
