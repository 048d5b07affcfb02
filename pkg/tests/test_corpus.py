import numpy as np

from paschke import corpus, fixtures
from paschke import cp_map as cm
from paschke.purity import is_pure

SEED42_SIZE50_HASH = "042bbafc958e67c8c4a65e8045c88322b8fc23a96d70a6d788fe3a72f7379763"


def test_hash_is_deterministic_and_frozen():
    a, b = corpus.generate(42, 50), corpus.generate(42, 50)
    assert corpus.corpus_hash(a) == corpus.corpus_hash(b) == SEED42_SIZE50_HASH
    assert corpus.corpus_hash(corpus.generate(43, 50)) != SEED42_SIZE50_HASH


def test_examples_come_first_and_kinds_cycle():
    entries = corpus.generate(1, 8 + 2 * len(corpus.KINDS))
    assert [e["name"] for e in entries[:8]] == list(fixtures.EXAMPLES)
    assert [e["kind"] for e in entries[8:]] == list(corpus.KINDS) * 2
    assert [e["index"] for e in entries] == list(range(len(entries)))


def test_algebras_stay_small():
    for e in corpus.generate(7, 60):
        phi = e["channel"]
        assert phi.domain.dim <= corpus.MAX_ALGEBRA_DIM
        assert phi.codomain.dim <= corpus.MAX_ALGEBRA_DIM
        assert phi.is_cp() and phi.norm() > 0


def test_generators_produce_their_kind():
    rng = np.random.default_rng(5)
    for _ in range(5):
        assert cm.is_miu(corpus.random_nmiu(rng))
        assert is_pure(corpus.random_ad(rng))
        assert is_pure(corpus.random_corner(rng))
        assert is_pure(corpus.random_compression(rng))
        s = corpus.random_state(rng)
        assert s.codomain.blocks == (1,)
        assert abs(s.one_image().data[0][0, 0] - 1.0) <= 1e-12


def test_corpus_mixes_pure_and_impure():
    pure = [is_pure(e["channel"]) for e in corpus.generate(42, 50)]
    assert 5 <= sum(pure) <= 45


def test_size_zero_is_empty():
    out = corpus.run(0, 0)
    assert out["ok"] and out["suites"] == {} and out["corpus_hash"] is None and out["failures"] == []


def test_small_run_passes_every_suite():
    out = corpus.run(3, 20)
    assert out["ok"], out["failures"]
    assert set(out["suites"]) == set(corpus.SUITES)
    assert out["suites"]["purequiv"]["pass"] == 20


def test_injected_fault_is_detected():
    out = corpus.run(3, 12, inject_fault=True)
    assert not out["ok"]
    assert out["suites"]["dilation"]["fail"] == 12
