"""Draft-length policy tests.

Oracle corpora are chosen so the confidence profile along the drafted chain
is known in closed form:

* ``"a" * 100`` — P(a|a) = 0.99, so every drafted token clears any sane
  threshold and only the length cap can stop expansion.
* ``["ab"*20, "ac"*20]`` — P(.|a) splits 0.5/0.5 between b and c, so the very
  first drafted token sits at confidence 0.5 and a threshold of 0.6 stops the
  policy inside its first chunk.
* ``["abz", "acz", "adz"]`` — after ``a b`` the chain reaches z and then the
  end-of-sequence marker, exercising the cut-after-eos rule.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speclab.drafter import ONE_STEP, DiffusionDrafter
from speclab.errors import ConfigError
from speclab.ngram import train_ngram
from speclab.policies import (
    FailFast,
    FailFastConfig,
    FixedAR,
    FixedDLLM,
    propose_failfast,
    propose_fixed_ar,
)


def make_drafter(docs):
    return DiffusionDrafter(train_ngram(docs, order=2, smoothing=0.0))


@pytest.fixture(scope="module")
def confident():
    return make_drafter([list("a" * 100)])


class TestFailFastConfig:
    def test_defaults(self):
        cfg = FailFastConfig()
        assert (cfg.step_size, cfg.confidence_threshold, cfg.max_length) == (10, 0.45, 60)
        assert cfg.allow_overshoot is False

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"step_size": 0},
            {"step_size": 61},
            {"confidence_threshold": 0.0},
            {"confidence_threshold": 1.0},
            {"confidence_threshold": -0.2},
        ],
    )
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ConfigError):
            FailFastConfig(**kwargs)


class TestFailFastExpansion:
    def test_fully_confident_runs_to_the_cap(self, confident):
        prefix = [confident.backbone.vocabulary.id_of("a")]
        proposal = propose_failfast(confident, prefix, FailFastConfig())
        assert len(proposal.tokens) == 60
        # Six chunks of 10 need blocks up to position 64: eight passes total.
        assert proposal.forward_passes == 8
        assert min(proposal.confidences) >= 0.99

    def test_subthreshold_first_chunk_stops_at_one_step(self):
        drafter = make_drafter([list("ab" * 20), list("ac" * 20)])
        prefix = [drafter.backbone.vocabulary.id_of("a")]
        cfg = FailFastConfig(confidence_threshold=0.6)
        proposal = propose_failfast(drafter, prefix, cfg)
        assert len(proposal.tokens) == cfg.step_size
        assert min(proposal.confidences) < 0.6

    def test_cap_truncates_the_final_chunk(self, confident):
        prefix = [confident.backbone.vocabulary.id_of("a")]
        cfg = FailFastConfig(step_size=10, max_length=25)
        proposal = propose_failfast(confident, prefix, cfg)
        assert len(proposal.tokens) == 25
        # The third chunk was drafted before truncation, so its passes stay
        # on the bill: blocks through position 32 cost four passes.
        assert proposal.forward_passes == 4

    def test_overshoot_keeps_the_whole_chunk(self, confident):
        prefix = [confident.backbone.vocabulary.id_of("a")]
        cfg = FailFastConfig(step_size=10, max_length=25, allow_overshoot=True)
        proposal = propose_failfast(confident, prefix, cfg)
        assert len(proposal.tokens) == 30
        assert proposal.forward_passes == 4

    def test_eos_cuts_the_draft_just_after_the_marker(self):
        drafter = make_drafter([list("abz"), list("acz"), list("adz")])
        vocab = drafter.backbone.vocabulary
        proposal = propose_failfast(drafter, [vocab.id_of("a")], FailFastConfig())
        assert proposal.tokens[-1] == vocab.eos_id
        assert len(proposal.tokens) == 3
        assert vocab.eos_id not in proposal.tokens[:-1]


class TestPolicyObjects:
    def test_labels(self):
        assert FixedAR(8).label() == "fixed_ar(8)"
        assert FixedDLLM(16).label() == "fixed_dllm(16,confidence_aware)"
        assert FixedDLLM(5, mode=ONE_STEP).label() == "fixed_dllm(5,one_step)"
        assert FailFast().label() == "failfast(step=10,threshold=0.45,cap=60)"

    def test_draft_length_validated(self):
        with pytest.raises(ConfigError):
            FixedAR(0)
        with pytest.raises(ConfigError):
            FixedDLLM(-3)

    def test_fixed_ar_charges_one_pass_per_token(self, mixed_lab):
        prompt = mixed_lab.prompts(1, seed=21)[0]
        proposal = FixedAR(12).propose(mixed_lab.drafter, prompt)
        assert proposal.forward_passes == 12
        assert len(proposal.tokens) == 12

    def test_fixed_ar_and_one_step_agree_on_tokens(self, mixed_lab):
        # Both walk the backbone's modal chain; only the pass bill differs.
        prompt = mixed_lab.prompts(1, seed=22)[0]
        ar = propose_fixed_ar(mixed_lab.drafter, prompt, 12)
        block = mixed_lab.drafter.draft_tokens(prompt, 12, ONE_STEP)
        assert ar.tokens == block.tokens
        assert ar.forward_passes == 12
        assert block.forward_passes == 2

    def test_fixed_dllm_propose(self, mixed_lab):
        prompt = mixed_lab.prompts(1, seed=23)[0]
        proposal = FixedDLLM(16, mode=ONE_STEP).propose(mixed_lab.drafter, prompt)
        assert len(proposal.tokens) == 16
        assert proposal.forward_passes == 2


def random_drafter_and_prefix(seed):
    rng = np.random.default_rng(seed)
    letters = "abcd"
    text = "".join(rng.choice(list(letters), size=240))
    drafter = DiffusionDrafter(train_ngram([list(text)], order=3, smoothing=0.1))
    start = int(rng.integers(0, 200))
    prefix = drafter.backbone.vocabulary.encode(text[start : start + 6])
    return drafter, prefix


class TestFailFastProperties:
    @settings(max_examples=25, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=10_000),
        step=st.integers(min_value=2, max_value=12),
        threshold=st.floats(min_value=0.05, max_value=0.95),
    )
    def test_length_is_chunk_aligned_capped_or_eos_cut(self, seed, step, threshold):
        drafter, prefix = random_drafter_and_prefix(seed)
        cfg = FailFastConfig(step_size=step, confidence_threshold=threshold, max_length=36)
        proposal = propose_failfast(drafter, prefix, cfg)
        n = len(proposal.tokens)
        eos = drafter.backbone.vocabulary.eos_id
        assert 1 <= n <= cfg.max_length
        assert n % step == 0 or n == cfg.max_length or proposal.tokens[-1] == eos

    @settings(max_examples=25, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=10_000),
        low=st.floats(min_value=0.05, max_value=0.9),
        bump=st.floats(min_value=0.01, max_value=0.09),
    )
    def test_raising_the_threshold_never_lengthens_the_draft(self, seed, low, bump):
        drafter, prefix = random_drafter_and_prefix(seed)
        lenient = propose_failfast(
            drafter, prefix, FailFastConfig(confidence_threshold=low)
        )
        strict = propose_failfast(
            drafter, prefix, FailFastConfig(confidence_threshold=min(low + bump, 0.99))
        )
        assert len(strict.tokens) <= len(lenient.tokens)
