"""Draft-length policies: how many tokens to speculate before each verify.

Two fixed-length baselines (autoregressive drafting and block-diffusion
drafting) plus the adaptive policy this package exists for: keep requesting
chunks of ``step_size`` drafted tokens and stop as soon as any token in the
newest chunk falls below the confidence threshold, the drafter emits
``<eos>``, or the draft reaches ``max_length``. Low confidence is treated as
a leading indicator of rejection, so the policy fails fast on hard content
and speculates deep into easy content.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .drafter import ONE_STEP, DiffusionDrafter, DraftProposal
from .errors import ConfigError
from .ngram import argmax_token


@dataclass(frozen=True)
class FailFastConfig:
    """Hyperparameters of the adaptive policy.

    Attributes:
        step_size: tokens drafted per expansion chunk (paper-scale default 10).
        confidence_threshold: minimum argmax probability a chunk token needs
            for expansion to continue; in (0, 1).
        max_length: hard cap on the draft submitted per round.
        allow_overshoot: when True, a final chunk that crosses ``max_length``
            is submitted whole; the default truncates the proposal back to
            ``max_length`` (the drafter passes stay charged either way).
    """

    step_size: int = 10
    confidence_threshold: float = 0.45
    max_length: int = 60
    allow_overshoot: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.step_size <= self.max_length:
            raise ConfigError(
                f"need 1 <= step_size <= max_length, got {self.step_size} and {self.max_length}"
            )
        if not 0.0 < self.confidence_threshold < 1.0:
            raise ConfigError(
                f"confidence threshold must be in (0, 1), got {self.confidence_threshold}"
            )


def propose_fixed_ar(drafter: DiffusionDrafter, prefix: list[int], n: int) -> DraftProposal:
    """Draft ``n`` tokens autoregressively: one backbone pass per token.

    Token-wise this is the same modal chain a one-step block produces; the
    difference is purely in the pass accounting, which is the point of
    comparing the two drafter styles under one cost model.
    """
    if n < 1:
        raise ConfigError(f"draft length must be >= 1, got {n}")
    backbone = drafter.backbone
    chain = list(prefix)
    tokens: list[int] = []
    confs: list[float] = []
    dists = []
    for _ in range(n):
        dist = backbone.next_distribution(chain)
        tok = argmax_token(dist)
        tokens.append(tok)
        confs.append(float(dist[tok]))
        dists.append(dist)
        chain.append(tok)
    return DraftProposal(tokens, confs, dists, forward_passes=n)


def propose_fixed_dllm(
    drafter: DiffusionDrafter, prefix: list[int], n: int, mode: str
) -> DraftProposal:
    """Draft a fixed ``n`` tokens with block decoding in the given mode."""
    return drafter.draft_tokens(prefix, n, mode)


def propose_failfast(
    drafter: DiffusionDrafter, prefix: list[int], config: FailFastConfig
) -> DraftProposal:
    """Confidence-gated draft expansion (one-step block drafting).

    Chunks of ``step_size`` tokens are drafted until a chunk contains a
    sub-threshold token, the drafter emits ``<eos>``, or the draft reaches
    ``max_length``. The chunk that triggered the stop is still part of the
    proposal; the verifier decides what survives. A proposal that ran past
    ``max_length`` is truncated back to it unless ``allow_overshoot`` is set,
    and a proposal containing ``<eos>`` is cut just after the marker.
    """
    session = drafter.session(prefix, mode=ONE_STEP)
    eos = drafter.backbone.vocabulary.eos_id
    length = 0
    while True:
        chunk_start = length
        length += config.step_size
        session.extend_to(length)
        tokens, confs = session.slice(chunk_start, length)
        if eos in tokens:
            length = chunk_start + tokens.index(eos) + 1
            break
        if min(confs) < config.confidence_threshold:
            break
        if length >= config.max_length:
            break
    if not config.allow_overshoot:
        length = min(length, config.max_length)
    return session.proposal(length)


@dataclass(frozen=True)
class FixedAR:
    """Always draft ``draft_len`` tokens with the autoregressive drafter."""

    draft_len: int

    def __post_init__(self) -> None:
        if self.draft_len < 1:
            raise ConfigError(f"draft length must be >= 1, got {self.draft_len}")

    def propose(self, drafter: DiffusionDrafter, prefix: list[int]) -> DraftProposal:
        return propose_fixed_ar(drafter, prefix, self.draft_len)

    def label(self) -> str:
        return f"fixed_ar({self.draft_len})"


@dataclass(frozen=True)
class FixedDLLM:
    """Always draft ``draft_len`` tokens with block-diffusion decoding."""

    draft_len: int
    mode: str = "confidence_aware"

    def __post_init__(self) -> None:
        if self.draft_len < 1:
            raise ConfigError(f"draft length must be >= 1, got {self.draft_len}")

    def propose(self, drafter: DiffusionDrafter, prefix: list[int]) -> DraftProposal:
        return propose_fixed_dllm(drafter, prefix, self.draft_len, self.mode)

    def label(self) -> str:
        return f"fixed_dllm({self.draft_len},{self.mode})"


@dataclass(frozen=True)
class FailFast:
    """Adaptive confidence-gated draft length."""

    config: FailFastConfig = field(default_factory=FailFastConfig)

    def propose(self, drafter: DiffusionDrafter, prefix: list[int]) -> DraftProposal:
        return propose_failfast(drafter, prefix, self.config)

    def label(self) -> str:
        c = self.config
        return (
            f"failfast(step={c.step_size},threshold={c.confidence_threshold},"
            f"cap={c.max_length})"
        )


Policy = Union[FixedAR, FixedDLLM, FailFast]
