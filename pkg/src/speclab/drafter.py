"""Block-wise diffusion drafter emulated on top of an n-gram backbone.

The emulator reproduces the mechanics that matter for speculation economics:
a block of masked slots, per-step confidence-ranked parallel unmasking, a
one-pass "modal chain" generation mode, and honest forward-pass accounting.
Conditional independence between slots unmasked in the same step is modeled
by context truncation: a masked slot only sees the contiguous run of unmasked
slots immediately to its left, so a masked gap forces the backbone into
short-context backoff and the proposal quality drops accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NoMaskedSlots
from .ngram import NGramModel, argmax_token

ONE_STEP = "one_step"
CONFIDENCE_AWARE = "confidence_aware"
DRAFT_MODES = (ONE_STEP, CONFIDENCE_AWARE)


@dataclass
class DraftProposal:
    """A drafted continuation plus everything verification needs.

    ``distributions[i]`` is the drafter's full next-token distribution at
    position ``i`` and ``confidences[i]`` is its maximum entry (the argmax
    probability). ``forward_passes`` counts every drafter pass spent
    producing the proposal, including work on tokens that were later cut.
    """

    tokens: list[int]
    confidences: list[float]
    distributions: list[np.ndarray]
    forward_passes: int

    def __post_init__(self) -> None:
        if not (len(self.tokens) == len(self.confidences) == len(self.distributions)):
            raise ConfigError("proposal fields must have equal length")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class BlockState:
    """One block of ``block_size`` slots being denoised against a fixed prefix.

    A slot is either masked (``None`` entries) or unmasked with a committed
    token, its confidence, and the distribution it was drawn from. Unmasked
    slots never change for the rest of the block's life.
    """

    prefix: list[int]
    block_size: int
    tokens: list[int | None] = field(default_factory=list)
    confidences: list[float | None] = field(default_factory=list)
    distributions: list[np.ndarray | None] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.block_size < 1:
            raise ConfigError(f"block size must be >= 1, got {self.block_size}")
        if not self.tokens:
            self.tokens = [None] * self.block_size
            self.confidences = [None] * self.block_size
            self.distributions = [None] * self.block_size

    def masked_slots(self) -> list[int]:
        return [j for j, tok in enumerate(self.tokens) if tok is None]

    @property
    def all_unmasked(self) -> bool:
        return all(tok is not None for tok in self.tokens)

    def leftmost_run(self) -> int:
        """Length of the contiguous unmasked run starting at slot 0."""
        run = 0
        for tok in self.tokens:
            if tok is None:
                break
            run += 1
        return run

    def slot_context(self, slot: int) -> list[int]:
        """Visible context for ``slot``: the unmasked run immediately left of it.

        If that run reaches slot 0 the committed prefix is prepended;
        otherwise the masked gap truncates everything further left.
        """
        run: list[int] = []
        i = slot - 1
        while i >= 0 and self.tokens[i] is not None:
            run.append(self.tokens[i])  # type: ignore[arg-type]
            i -= 1
        run.reverse()
        if i < 0:
            return self.prefix + run
        return run


def _proposals_for_masked(
    backbone: NGramModel, state: BlockState
) -> list[tuple[int, int, float, np.ndarray]]:
    """(slot, argmax token, confidence, distribution) for every masked slot,
    all computed from the state at the start of the step."""
    out = []
    for j in state.masked_slots():
        dist = backbone.next_distribution(state.slot_context(j))
        tok = argmax_token(dist)
        out.append((j, tok, float(dist[tok]), dist))
    return out


def _unmask(state: BlockState, chosen: list[tuple[int, int, float, np.ndarray]]) -> None:
    for j, tok, conf, dist in chosen:
        state.tokens[j] = tok
        state.confidences[j] = conf
        state.distributions[j] = dist


def denoise_step(backbone: NGramModel, state: BlockState, unmask_threshold: float) -> list[int]:
    """One parallel denoise pass: unmask every slot whose confidence clears
    ``unmask_threshold``, or the single most confident slot if none does
    (leftmost slot on ties), so every pass makes progress. Returns the slots
    unmasked by this pass. Costs one forward pass.
    """
    proposals = _proposals_for_masked(backbone, state)
    if not proposals:
        raise NoMaskedSlots("block is already fully unmasked")
    chosen = [p for p in proposals if p[2] >= unmask_threshold]
    if not chosen:
        best = proposals[0]
        for p in proposals[1:]:
            if p[2] > best[2]:
                best = p
        chosen = [best]
    _unmask(state, chosen)
    return [p[0] for p in chosen]


def one_step_block(backbone: NGramModel, prefix: list[int], block_size: int) -> BlockState:
    """Generate a whole block in a single forward pass.

    Slot ``j`` conditions on the prefix plus the argmax tokens already chosen
    at slots ``0..j-1`` of this same pass (the modal chain), so one cheap pass
    still yields a coherent block; the emulator charges it as one pass.
    """
    state = BlockState(prefix=list(prefix), block_size=block_size)
    chain = list(prefix)
    for j in range(block_size):
        dist = backbone.next_distribution(chain)
        tok = argmax_token(dist)
        state.tokens[j] = tok
        state.confidences[j] = float(dist[tok])
        state.distributions[j] = dist
        chain.append(tok)
    return state


def fixed_step_block(
    backbone: NGramModel, prefix: list[int], block_size: int, steps: int
) -> BlockState:
    """Denoise a block in exactly ``steps`` passes with per-step unmask quotas.

    The quota schedule splits the block as evenly as possible (a block of 8 in
    3 steps unmasks 3, 3, then 2 slots) and each pass unmasks the leftmost
    masked slots. Masked positions left of a slot are bridged with the
    block's modal chain — the model's best coherent guess at the region, the
    same idealisation one-step mode uses — but a slot r positions into its
    pass distrusts the nearest guesses and conditions on only order-1-r
    bridge tokens, decaying to the unigram. One step is maximally parallel
    (and worst), ``block_size`` steps never bridges at all and is fully
    sequential, and the range in between is the compute-quality knob.
    """
    if not 1 <= steps <= block_size:
        raise ConfigError(f"steps must be in 1..{block_size}, got {steps}")
    state = BlockState(prefix=list(prefix), block_size=block_size)
    bridge = list(prefix)
    for _ in range(block_size):
        bridge.append(argmax_token(backbone.next_distribution(bridge)))
    usable = backbone.order - 1
    base, rem = divmod(block_size, steps)
    slot = 0
    for step in range(steps):
        quota = base + (1 if step < rem else 0)
        for r in range(quota):
            keep = max(0, usable - r)
            visible = bridge[: len(prefix) + slot]
            dist = backbone.next_distribution(visible[len(visible) - keep :] if keep else [])
            tok = argmax_token(dist)
            state.tokens[slot] = tok
            state.confidences[slot] = float(dist[tok])
            state.distributions[slot] = dist
            slot += 1
    return state


@dataclass(frozen=True)
class DiffusionDrafter:
    """The drafting side of the loop: a backbone plus block decoding settings."""

    backbone: NGramModel
    block_size: int = 8
    unmask_threshold: float = 0.9

    def __post_init__(self) -> None:
        if self.block_size < 1:
            raise ConfigError(f"block size must be >= 1, got {self.block_size}")
        if not 0.0 < self.unmask_threshold <= 1.0:
            raise ConfigError(
                f"unmask threshold must be in (0, 1], got {self.unmask_threshold}"
            )

    def session(self, prefix: list[int], mode: str = CONFIDENCE_AWARE) -> "DraftSession":
        return DraftSession(self, prefix, mode)

    def draft_tokens(self, prefix: list[int], n: int, mode: str = CONFIDENCE_AWARE) -> DraftProposal:
        """Draft ``n`` tokens by decoding consecutive blocks.

        Blocks are generated in order until the leftmost ``n`` draft positions
        are all unmasked; exactly the first ``n`` tokens are returned but
        every pass spent is charged, including passes that unmasked positions
        beyond ``n`` (in confidence-aware mode the unmasking order inside a
        block is confidence-ranked, so trailing blocks routinely cost passes
        for tokens that are thrown away).
        """
        session = self.session(prefix, mode)
        session.extend_to(n)
        return session.proposal(n)


class DraftSession:
    """Incremental block-wise drafting against a fixed prefix.

    The adaptive policy grows its draft chunk by chunk within a round; the
    session keeps partially denoised block state between extensions so that
    already-paid passes are never repeated.
    """

    def __init__(self, drafter: DiffusionDrafter, prefix: list[int], mode: str) -> None:
        if mode not in DRAFT_MODES:
            raise ConfigError(f"unknown draft mode: {mode!r}")
        self._drafter = drafter
        self._prefix = list(prefix)
        self._mode = mode
        self._done_tokens: list[int] = []
        self._done_confs: list[float] = []
        self._done_dists: list[np.ndarray] = []
        self._block: BlockState | None = None
        self.forward_passes = 0

    @property
    def available(self) -> int:
        """Number of contiguous drafted positions, starting at the prefix."""
        n = len(self._done_tokens)
        if self._block is not None:
            n += self._block.leftmost_run()
        return n

    def _finalize_block(self, state: BlockState) -> None:
        for j in range(state.block_size):
            self._done_tokens.append(state.tokens[j])  # type: ignore[arg-type]
            self._done_confs.append(state.confidences[j])  # type: ignore[arg-type]
            self._done_dists.append(state.distributions[j])  # type: ignore[arg-type]

    def extend_to(self, n: int) -> None:
        """Draft until the leftmost ``n`` positions are unmasked."""
        if n < 1:
            raise ConfigError(f"draft length must be >= 1, got {n}")
        backbone = self._drafter.backbone
        block_size = self._drafter.block_size
        while self.available < n:
            if self._mode == ONE_STEP:
                state = one_step_block(backbone, self._prefix + self._done_tokens, block_size)
                self.forward_passes += 1
                self._finalize_block(state)
                continue
            if self._block is None:
                self._block = BlockState(
                    prefix=self._prefix + self._done_tokens, block_size=block_size
                )
            denoise_step(backbone, self._block, self._drafter.unmask_threshold)
            self.forward_passes += 1
            if self._block.all_unmasked:
                self._finalize_block(self._block)
                self._block = None

    def slice(self, start: int, stop: int) -> tuple[list[int], list[float]]:
        """Tokens and confidences for contiguous positions ``start..stop-1``."""
        tokens, confs, _ = self._first(stop)
        return tokens[start:], confs[start:]

    def _first(self, n: int) -> tuple[list[int], list[float], list[np.ndarray]]:
        if n > self.available:
            raise ConfigError(f"only {self.available} positions drafted, asked for {n}")
        tokens = list(self._done_tokens)
        confs = list(self._done_confs)
        dists = list(self._done_dists)
        if len(tokens) < n and self._block is not None:
            run = self._block.leftmost_run()
            tokens += self._block.tokens[:run]  # type: ignore[arg-type]
            confs += self._block.confidences[:run]  # type: ignore[arg-type]
            dists += self._block.distributions[:run]  # type: ignore[arg-type]
        return tokens[:n], confs[:n], dists[:n]

    def proposal(self, n: int) -> DraftProposal:
        """First ``n`` drafted tokens, charged with every pass spent so far."""
        tokens, confs, dists = self._first(n)
        return DraftProposal(tokens, confs, dists, self.forward_passes)
