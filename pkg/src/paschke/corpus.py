"""Seeded channel corpus and the cross-validation suites run over it.

The corpus mixes NMIU maps, ``Ad_V`` maps, standard corners, standard
compressions, convex mixtures, states and random Kraus maps; each algebra has
total dimension at most 9. The first entries are always the worked examples.
"""
import dataclasses

import numpy as np

from . import cp_map as cm
from . import fixtures, purity
from .dilation.paschke import paschke_dilate, verify_dilation
from .errors import PaschkeError
from .serialize import cpmap_to_json, digest
from .vn_algebra import linalg
from .vn_algebra.algebra import FdVnAlgebra

MAX_ALGEBRA_DIM = 9
BRUTE_FORCE_MAX_DIM = 4
FAULT_SIZE = 1e-3

_SHAPES = [(1,), (2,), (3,), (1, 1), (1, 1, 1), (2, 1), (1, 2), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
KINDS = ("nmiu", "ad", "corner", "compression", "convex", "state", "kraus")

SUITES = ("purequiv", "injectivity", "extremality", "extremality_bruteforce", "stormer", "dilation", "f_pure")


def _algebra(rng, max_blocks=3):
    shapes = [s for s in _SHAPES if len(s) <= max_blocks]
    return FdVnAlgebra(shapes[int(rng.integers(len(shapes)))])


def random_nmiu(rng):
    """``a -> (+)_j u_j ((+)_i a_i (x) 1_{c_ij}) u_j*`` with random multiplicities and unitaries."""
    while True:
        a = _algebra(rng)
        n = np.array(a.blocks)
        cols = []
        for _ in range(int(rng.integers(1, 3))):
            c = rng.integers(0, 3, size=len(n))
            if c.sum() == 0:
                c[int(rng.integers(len(n)))] = 1
            if int(c @ n) <= 3:
                cols.append(c)
        if not cols:
            continue
        b = FdVnAlgebra([int(c @ n) for c in cols])
        if b.dim <= MAX_ALGEBRA_DIM:
            break
    us = [linalg.random_unitary(m, rng) for m in b.blocks]

    def fn(x):
        out = []
        for c, u in zip(cols, us):
            parts = [np.kron(x.data[i], np.eye(k)) for i, k in enumerate(c) if k]
            blk = np.zeros((u.shape[0],) * 2, dtype=complex)
            o = 0
            for p in parts:
                blk[o:o + len(p), o:o + len(p)] = p
                o += len(p)
            out.append(u @ blk @ u.conj().T)
        return b.element(out)

    return cm.from_function(a, b, fn)


def random_ad(rng):
    n, m = (int(x) for x in rng.integers(1, 4, size=2))
    v = linalg.random_complex((n, m), rng)
    return cm.ad(v / linalg.opnorm(v))


def random_corner(rng):
    a = _algebra(rng)
    return cm.standard_corner(_nonzero_projection(a, rng))


def _nonzero_projection(a, rng):
    while True:
        p = a.random_projection(rng)
        if p.norm() > 0.5:
            return p


def random_compression(rng):
    a = _algebra(rng)
    e = a.random_effect(rng)
    if rng.random() < 0.5:
        # an effect with a kernel exercises the support projection
        e = e @ _nonzero_projection(a, rng)
        e = (e @ e.adjoint()).hermitian_part()
        e = e / e.norm()
    return cm.standard_compression(e)


def random_convex(rng):
    k = int(rng.integers(2, 4))
    w = rng.dirichlet(np.ones(k))
    if rng.random() < 0.5:
        n = int(rng.integers(2, 4))
        maps = [cm.ad(linalg.random_unitary(n, rng)) for _ in range(k)]
    else:
        a, b = _algebra(rng, 2), _algebra(rng, 2)
        maps = [random_kraus(rng, a, b, max_rank=1) for _ in range(k)]
    return cm.convex(w, maps)


def random_state(rng):
    a = _algebra(rng)
    blocks = []
    for n in a.blocks:
        r = int(rng.integers(0, n + 1))
        g = linalg.random_complex((n, r), rng) if r else np.zeros((n, 1))
        blocks.append(g @ g.conj().T)
    if all(np.abs(x).max() == 0 for x in blocks):
        blocks[0] = np.eye(a.blocks[0])
    d = a.element(blocks)
    return cm.state(a, d / d.trace().real)


def random_kraus(rng, a=None, b=None, max_rank=3):
    a = _algebra(rng) if a is None else a
    b = _algebra(rng) if b is None else b
    kraus = {}
    for i, n in enumerate(a.blocks):
        for j, m in enumerate(b.blocks):
            r = int(rng.integers(0, max_rank + 1))
            if r:
                kraus[(i, j)] = [linalg.random_complex((n, m), rng) for _ in range(r)]
    if not kraus:
        kraus[(0, 0)] = [linalg.random_complex((a.blocks[0], b.blocks[0]), rng)]
    phi = cm.from_kraus(a, b, kraus)
    return phi * (1.0 / phi.norm())


_GENERATORS = {
    "nmiu": random_nmiu, "ad": random_ad, "corner": random_corner, "compression": random_compression,
    "convex": random_convex, "state": random_state, "kraus": random_kraus,
}


def generate(seed, size):
    """``size`` entries ``{"index", "kind", "name", "channel"}``; the worked examples come first."""
    rng = np.random.default_rng(seed)
    out = []
    for idx in range(size):
        if idx < len(fixtures.EXAMPLES):
            name = fixtures.EXAMPLES[idx]
            out.append({"index": idx, "kind": "example", "name": name, "channel": fixtures.get(name)})
            continue
        kind = KINDS[(idx - len(fixtures.EXAMPLES)) % len(KINDS)]
        out.append({"index": idx, "kind": kind, "name": f"{kind}-{idx}", "channel": _GENERATORS[kind](rng)})
    return out


def corpus_json(entries):
    return [{"index": e["index"], "kind": e["kind"], "name": e["name"], "channel": cpmap_to_json(e["channel"])}
            for e in entries]


def corpus_hash(entries):
    return digest(corpus_json(entries))


def _is_nmiu(entry):
    return entry["kind"] == "nmiu" or entry["name"] in ("diagonal_embedding", "conjugated_embedding")


def check_entry(entry, seed=0, inject_fault=False, brute_force=True):
    """Run every applicable suite on one entry; ``{suite: bool}`` (absent when not applicable)."""
    phi = entry["channel"]
    res = {}
    dil = paschke_dilate(phi, seed=seed)
    pure = purity.is_pure(phi)
    res["purequiv"] = pure == purity.is_pure_via_dilation(phi, dil)
    predicted, actual = purity.injectivity_criterion(phi, dil)
    res["injectivity"] = predicted == actual
    extreme = purity.is_ncp_extreme(phi, dil)
    if _is_nmiu(entry) or pure:
        res["extremality"] = extreme
    if brute_force and phi.domain.dim <= BRUTE_FORCE_MAX_DIM:
        witness = purity.find_extremality_witness(phi, np.random.default_rng(seed))
        res["extremality_bruteforce"] = extreme == (witness is None)
    if len(phi.codomain.blocks) == 1:
        res["stormer"] = purity.is_stormer_pure(phi, dil) == pure
    target = dil
    if inject_fault:
        rng = np.random.default_rng(seed + entry["index"])
        noise = linalg.random_complex(dil.f.matrix.shape, rng)
        bump = cm.from_matrix(dil.P, phi.codomain, FAULT_SIZE * noise / linalg.opnorm(noise))
        target = dataclasses.replace(dil, f=dil.f + bump)
    report = verify_dilation(target, seed=seed, check_purity=False)
    res["dilation"] = report["ok"]
    res["f_pure"] = purity.is_pure(dil.f)
    return res


def run(seed, size, inject_fault=False, brute_force=True):
    """Generate the corpus and tally per-suite pass/fail counts; entries are reported in index order."""
    entries = generate(seed, size)
    summary = {s: {"pass": 0, "fail": 0} for s in SUITES} if entries else {}
    failures = []
    for e in entries:
        try:
            res = check_entry(e, seed=seed, inject_fault=inject_fault, brute_force=brute_force)
        except PaschkeError as exc:
            failures.append({"index": e["index"], "name": e["name"], "suite": "error", "error": exc.to_dict()})
            continue
        for suite, ok in res.items():
            summary[suite]["pass" if ok else "fail"] += 1
            if not ok:
                failures.append({"index": e["index"], "name": e["name"], "suite": suite})
    return {
        "schema_version": 1,
        "seed": seed,
        "size": size,
        "inject_fault": inject_fault,
        "corpus_hash": corpus_hash(entries) if entries else None,
        "suites": summary,
        "failures": failures,
        "ok": not failures,
    }


__all__ = ["generate", "run", "check_entry", "corpus_json", "corpus_hash", "KINDS", "SUITES",
           "random_nmiu", "random_ad", "random_corner", "random_compression", "random_convex", "random_state",
           "random_kraus"]
