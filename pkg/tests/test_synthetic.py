"""Seeded synthetic movement generation."""

import numpy as np

from idelog.synthetic import (
    GeneratorConfig,
    generate_corpus,
    sample_model,
    signature_from_model,
    writer_corpus,
)


def test_fixed_seed_reproduces_the_corpus():
    cfg = GeneratorConfig(seed=31, count=5)
    a = generate_corpus(cfg)
    b = generate_corpus(cfg)
    assert len(a) == len(b) == 5
    for (model_a, sig_a), (model_b, sig_b) in zip(a, b):
        assert model_a == model_b
        np.testing.assert_array_equal(sig_a.x, sig_b.x)
        np.testing.assert_array_equal(sig_a.t, sig_b.t)


def test_sampled_models_respect_the_config_ranges():
    cfg = GeneratorConfig(seed=2, count=30, strokes_min=4, strokes_max=12)
    for model, sig in generate_corpus(cfg):
        assert 4 <= model.nb_log <= 12
        assert cfg.duration_min <= model.duration <= cfg.duration_max
        onsets = [s.t0 for s in model.strokes]
        assert onsets == sorted(onsets)
        assert all(s.D > 0 and s.sigma > 0 for s in model.strokes)
        assert sig.t.size == int(np.floor(model.duration * cfg.rate + 1e-9)) + 1
        assert sig.source_id.startswith("syn")


def test_rendered_signature_matches_the_grid():
    rng = np.random.default_rng(5)
    model = sample_model(rng, GeneratorConfig())
    sig = signature_from_model(model, 100.0, source_id="demo")
    assert sig.t[0] == 0.0
    np.testing.assert_allclose(np.diff(sig.t), 0.01, atol=1e-12)
    assert bool(sig.pen_down.all())
    assert sig.source_id == "demo"


def test_writer_corpus_shape_and_ids():
    corpus = writer_corpus(3, 4, seed=9)
    assert sorted(corpus) == ["w00", "w01", "w02"]
    for wid, sigs in corpus.items():
        assert len(sigs) == 4
        assert [s.source_id for s in sigs] == [f"{wid}_s{k:02d}" for k in range(4)]
    flat = [s for sigs in corpus.values() for s in sigs]
    lengths = {s.t.size for s in flat}
    assert len(lengths) <= 3


def test_writer_corpus_within_writer_variation_is_smaller():
    corpus = writer_corpus(2, 3, seed=13)
    means = {
        wid: np.mean([np.mean(np.hypot(s.x, s.y)) for s in sigs])
        for wid, sigs in corpus.items()
    }
    spread_within = max(
        np.std([np.mean(np.hypot(s.x, s.y)) for s in sigs])
        for sigs in corpus.values()
    )
    between = abs(means["w00"] - means["w01"])
    assert between > 0.0
    assert spread_within < between
