"""Community-question-answering summarization corpus builder and summarizers."""

__version__ = "0.1.0"
