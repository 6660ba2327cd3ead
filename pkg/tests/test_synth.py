import pytest

from stylodiv import InputError
from stylodiv.corpus import ingest
from stylodiv.features import FEATURE_ORDER, FeatureId, extract
from stylodiv.synth import (
    DEFAULT_RATES,
    SynthConfig,
    expected_frequency,
    generate_texts,
    write_jsonl,
)
from stylodiv.textmodel import Document


def extract_all(cfg):
    return [extract(Document(i, t)) for i, t in generate_texts(cfg)]


class TestDeterministicMode:
    def test_exact_planted_counts(self):
        cfg = SynthConfig(docs=5, tokens_per_doc=1000, deterministic_counts=True)
        vecs = extract_all(cfg)
        for v in vecs:
            assert v.token_count == 1000
            for f in FEATURE_ORDER:
                want = DEFAULT_RATES.get(f, 0.0)
                assert v.counts[f] == want, (f, v.counts[f], want)
                assert v.values[f] == want

    def test_non_integral_rate_fatal(self):
        cfg = SynthConfig(docs=1, tokens_per_doc=250, deterministic_counts=True)
        with pytest.raises(InputError, match="integral"):
            generate_texts(cfg)

    def test_expected_frequency_reports_rate(self):
        cfg = SynthConfig(docs=1, tokens_per_doc=1000, deterministic_counts=True)
        assert expected_frequency(cfg, FeatureId.HEDGING) == 6.0
        assert expected_frequency(cfg, FeatureId.SEMICOLON) == 4.0


class TestRandomMode:
    def test_token_count_always_exact(self):
        for seed in (1, 2, 3):
            cfg = SynthConfig(docs=10, tokens_per_doc=250, seed=seed)
            for v in extract_all(cfg):
                assert v.token_count == 250

    def test_pooled_rates_near_configured(self):
        cfg = SynthConfig(docs=300, tokens_per_doc=250, seed=9)
        vecs = extract_all(cfg)
        tokens = sum(v.token_count for v in vecs)
        for f, rate in DEFAULT_RATES.items():
            pooled = sum(v.counts[f] for v in vecs) * 1000.0 / tokens
            assert 0.6 * rate < pooled < 1.4 * rate, (f, pooled, rate)

    def test_deterministic_for_seed(self):
        cfg = SynthConfig(docs=4, tokens_per_doc=250, seed=5)
        assert generate_texts(cfg) == generate_texts(cfg)

    def test_seed_variation(self):
        a = generate_texts(SynthConfig(docs=2, tokens_per_doc=250, seed=1))
        b = generate_texts(SynthConfig(docs=2, tokens_per_doc=250, seed=2))
        assert a != b


class TestCleanFiller:
    def test_zero_rates_trigger_nothing(self):
        cfg = SynthConfig(docs=6, tokens_per_doc=200, rates={})
        for v in extract_all(cfg):
            assert v.token_count == 200
            assert all(c == 0 for c in v.counts.values())


class TestBudget:
    def test_too_small_doc_fatal(self):
        cfg = SynthConfig(docs=1, tokens_per_doc=40, seed=3)
        with pytest.raises(InputError):
            generate_texts(cfg)


class TestJsonl:
    def test_roundtrip_through_ingest(self, tmp_path):
        p = tmp_path / "synth.jsonl"
        write_jsonl(SynthConfig(docs=7, tokens_per_doc=250, seed=2), p)
        docs = list(ingest(p, "jsonl"))
        assert len(docs) == 7
        assert docs[0].id == "synth#00000"
        assert all(d.token_count == 250 for d in docs)
