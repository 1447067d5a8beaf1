"""Tokenizers that map text to token strings and back.

Only two flavors are needed at desk scale: character-level (the default for
the synthetic workloads) and whitespace-separated words.
"""

from __future__ import annotations

from .errors import ConfigError

TOKENIZER_KINDS = ("char", "whitespace")


def tokenize(text: str, kind: str = "char") -> list[str]:
    """Split ``text`` into token strings.

    ``char`` yields one token per character; ``whitespace`` splits on runs of
    whitespace and drops empty pieces.
    """
    if kind == "char":
        return list(text)
    if kind == "whitespace":
        return text.split()
    raise ConfigError(f"unknown tokenizer kind: {kind!r}")


def detokenize(tokens: list[str], kind: str = "char") -> str:
    """Join token strings back into display text (inverse of :func:`tokenize`)."""
    if kind == "char":
        return "".join(tokens)
    if kind == "whitespace":
        return " ".join(tokens)
    raise ConfigError(f"unknown tokenizer kind: {kind!r}")
