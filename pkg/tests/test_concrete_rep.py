import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from proper_affine.concrete_rep import (
    FIXTURES,
    RepSpec,
    check_criterion,
    compound,
    fixture,
    kron_derivation,
    kron_power,
    realize,
    split_multiplicities,
    sym_embedding,
    vt0_basis,
    wedge_embedding,
)
from proper_affine.errors import BadInput
from proper_affine.rep_weights import multiplicities_split

NONCOMPACT = ["so21", "so32", "so31", "sl3s3", "sl2adj", "sl3adj", "so21adj", "so32adj", "sl4w2"]


def _random_member(rep, seed):
    rng = np.random.default_rng(seed)
    fam = rep.fam
    x = rng.standard_normal(max(fam.ambient_dim, 1)) * 0.7
    return fam.random_k(rng) @ fam.exp_cartan(x) @ fam.random_k(rng) if fam.ambient_dim else fam.random_k(rng)


@pytest.mark.parametrize("name", NONCOMPACT)
def test_homomorphism(name):
    rep = fixture(name)
    g, h = _random_member(rep, 1), _random_member(rep, 2)
    assert rep.fam.is_member(g) and rep.fam.is_member(h)
    lhs = rep.rho(g @ h)
    rhs = rep.rho(g) @ rep.rho(h)
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(lhs)
    np.testing.assert_allclose(rep.rho(np.eye(rep.fam.n)), np.eye(rep.dim_v), atol=1e-12)


@pytest.mark.parametrize("name", NONCOMPACT)
def test_cartan_acts_diagonally_by_weights(name):
    rep = fixture(name)
    x = np.linspace(1.0, 0.1, rep.fam.ambient_dim)
    act = rep.rho(rep.fam.exp_cartan(x))
    expected = np.diag([math.exp(sum(float(c) * t for c, t in zip(w, x))) for w in rep.weights])
    np.testing.assert_allclose(act, expected, atol=1e-9)


@pytest.mark.parametrize("name", NONCOMPACT)
def test_weight_multiset_matches_freudenthal(name):
    rep = fixture(name)
    counts = {}
    for w in rep.weights:
        counts[w] = counts.get(w, 0) + 1
    if rep.fam.kind == "SL" or rep.fam.p == rep.fam.q + 1:
        assert counts == multiplicities_split(rep.rs, rep.highest).multiplicities
        assert split_multiplicities(rep) is not None
    assert frozenset(counts) == rep.omega.weights


@pytest.mark.parametrize("name", NONCOMPACT)
def test_w0_representative(name):
    rep = fixture(name)
    w0 = rep.fam.w0_std()
    assert rep.fam.is_member(w0)
    w0f = np.array(rep.rs.w0, dtype=float)
    # w0 sends the weight space of w to that of w0(w)
    for i, w in enumerate(rep.weights):
        img = rep.w0_rep[:, i]
        target = tuple(w0f @ np.array([float(c) for c in w]))
        for j in np.flatnonzero(np.abs(img) > 1e-9):
            assert np.allclose([float(c) for c in rep.weights[j]], target)


def test_sl3_w0_matrix():
    np.testing.assert_allclose(fixture("sl3s3").fam.w0_std(), [[0, 0, -1], [0, 1, 0], [1, 0, 0]])


def test_sl3s3_witness_is_e1e2e3():
    rep = fixture("sl3s3")
    rpt = check_criterion(rep)
    assert rpt.holds and rpt.v0_dim == 1
    raw = rep.basis @ rpt.witness
    assert abs(abs(raw[4]) - 1.0) <= 1e-12
    combos = list(itertools.combinations_with_replacement(range(3), 3))
    assert combos[4] == (0, 1, 2)
    w0 = rep.fam.w0_std()
    np.testing.assert_allclose(rep.rho(w0) @ rpt.witness, -rpt.witness, atol=1e-12)


@pytest.mark.parametrize(
    "name,holds,vt0_dim",
    [("so21", True, 1), ("so31", False, 0), ("so32", False, 1), ("sl3s3", True, 1), ("sl4w2", False, 0), ("sl2adj", True, 1), ("so3", False, 0), ("sl3trivial", False, 1)],
)
def test_criterion_and_vt0(name, holds, vt0_dim):
    rep = fixture(name)
    assert check_criterion(rep).holds is holds
    assert vt0_basis(rep).shape[1] == vt0_dim


def test_unknown_fixture_and_bad_specs():
    with pytest.raises(BadInput):
        fixture("nope")
    with pytest.raises(BadInput):
        realize(RepSpec("SO", p=1, q=2))
    with pytest.raises(BadInput):
        realize(RepSpec("SL", n=3, rep_kind="wedge", degree=3))
    with pytest.raises(BadInput):
        realize(RepSpec("SP", n=4))


def test_fixture_table_complete():
    for name in FIXTURES:
        rep = fixture(name)
        assert rep.to_json()["dim_v"] == rep.dim_v
        assert rep.basis.shape == (rep.basis.shape[0], rep.dim_v)


def test_embeddings_orthonormal():
    for n, k in [(3, 2), (3, 3), (4, 2)]:
        e = sym_embedding(n, k)
        np.testing.assert_allclose(e.T @ e, np.eye(math.comb(n + k - 1, k)), atol=1e-12)
        w = wedge_embedding(n, k) if k < n else None
        if w is not None:
            np.testing.assert_allclose(w.T @ w, np.eye(math.comb(n, k)), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_compound_is_multiplicative(seed, k):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
    np.testing.assert_allclose(compound(a @ b, k), compound(a, k) @ compound(b, k), atol=1e-9)
    # wedge of the tensor power, seen through the embedding, is the compound
    emb = wedge_embedding(4, k)
    np.testing.assert_allclose(emb.T @ kron_power(a, k) @ emb, compound(a, k), atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_kron_derivation_is_derivative(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((3, 3))
    t = 1e-6
    fd = (kron_power(expm(t * x), 3) - kron_power(expm(-t * x), 3)) / (2 * t)
    np.testing.assert_allclose(fd, kron_derivation(x, 3), atol=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_vt0_is_fixed_by_levi_generators(seed):
    rep = fixture("so32adj")
    b = vt0_basis(rep)
    assert b.shape[1] > 0
    rng = np.random.default_rng(seed)
    # the identity component of the centralizer of the Cartan subspace fixes V^t_0
    for m in rep.m_generators:
        np.testing.assert_allclose(m @ b, b, atol=1e-10)
    x = rng.standard_normal(rep.fam.ambient_dim)
    np.testing.assert_allclose(rep.rho(rep.fam.exp_cartan(x)) @ b, b, atol=1e-10)
