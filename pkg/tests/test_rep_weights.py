from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proper_affine.errors import BadInput, NotApplicable
from proper_affine.rep_weights import (
    classify,
    fundamental_type_structure,
    highest_from_varpi,
    in_hull_dominance,
    in_hull_lp,
    is_w_invariant,
    lattice_hull_bruteforce,
    multiplicities_split,
    omega_w0,
    roots_in_weights_check,
    weight_set,
    weyl_dimension,
    weyl_orbit,
)
from proper_affine.root_system import build_root_system, parse_root_system, vec

# (root system, varpi coordinates, number of weights, dimension), counted by hand
KNOWN = [
    ("A1", (4,), 5, 5),
    ("A2", (1, 0), 3, 3),
    ("A2", (1, 1), 7, 8),
    ("A2", (3, 0), 10, 10),
    ("A3", (0, 1, 0), 6, 6),
    ("B2", (0, 1), 4, 4),
    ("B2", (1, 0), 5, 5),
    ("C2", (0, 1), 5, 5),
    ("BC2", (1, 0), 5, None),
]


@pytest.mark.parametrize("name,coords,count,dim", KNOWN)
def test_known_counts(name, coords, count, dim):
    rs = parse_root_system(name)
    hw = highest_from_varpi(rs, coords)
    ws = weight_set(rs, hw)
    assert len(ws) == count
    if dim is not None:
        assert multiplicities_split(rs, hw).dimension == dim == weyl_dimension(rs, hw)


@pytest.mark.parametrize(
    "name,coords", [("A2", (2, 1)), ("B2", (1, 1)), ("C2", (2, 0)), ("BC2", (1, 1)), ("A1xB2", (1, 0, 1)), ("D3", (1, 0, 1))]
)
def test_weight_set_matches_lp_oracle(name, coords):
    rs = parse_root_system(name)
    hw = highest_from_varpi(rs, coords)
    assert weight_set(rs, hw).weights == lattice_hull_bruteforce(rs, hw)


def test_a3_swinging_example():
    rs = build_root_system("A", 3)
    hw = vec((4, -1, -1, -2))
    assert rs.varpi_coords(hw) == (Q(5), Q(0), Q(1))
    ws = multiplicities_split(rs, hw)
    assert len(ws) == 119 and ws.dimension == 189
    assert ws.multiplicities[vec((0, 0, 0, 0))] == 3
    cls = classify(rs, ws)
    assert cls.swinging and cls.zero_is_weight
    assert vec((-1, -1, 4, -2)) in ws.weights


def test_classification_flags():
    a2 = build_root_system("A", 2)
    adj = weight_set(a2, highest_from_varpi(a2, (1, 1)))
    c = classify(a2, adj)
    assert c.abundant and c.limited and not c.awkward
    std = weight_set(a2, highest_from_varpi(a2, (1, 0)))
    c = classify(a2, std)
    assert not c.zero_is_weight and not c.limited and not c.abundant and c.awkward
    assert roots_in_weights_check(a2, adj)
    sym3 = weight_set(a2, highest_from_varpi(a2, (3, 0)))
    fixed = omega_w0(a2, sym3)
    assert vec((0, 0, 0)) in fixed
    assert all(a2.apply_w0(w) == w for w in fixed)


def test_roots_in_weights_not_applicable():
    b2 = build_root_system("B", 2)
    with pytest.raises(NotApplicable):
        roots_in_weights_check(b2, weight_set(b2, highest_from_varpi(b2, (1, 0))))
    a2 = build_root_system("A", 2)
    with pytest.raises(NotApplicable):
        roots_in_weights_check(a2, weight_set(a2, highest_from_varpi(a2, (1, 0))))


def test_fundamental_type():
    rs = build_root_system("C", 3)
    for i in range(3):
        ws = weight_set(rs, highest_from_varpi(rs, tuple(2 * int(j == i) for j in range(3))))
        assert fundamental_type_structure(rs, ws, i)


def test_bad_highest_weights():
    rs = build_root_system("A", 2)
    with pytest.raises(BadInput):
        highest_from_varpi(rs, (1, -1))
    with pytest.raises(BadInput):
        highest_from_varpi(rs, (1,))
    with pytest.raises(BadInput):
        weight_set(rs, vec((0, 1, -1)))  # not dominant
    with pytest.raises(BadInput):
        weight_set(rs, vec((1, 0, 0)))  # not in the span of the roots
    with pytest.raises(NotApplicable):
        weyl_dimension(build_root_system("BC", 2), vec((1, 0)))


def test_orbit_sizes():
    rs = build_root_system("B", 3)
    assert len(weyl_orbit(rs, vec((1, 0, 0)))) == 6
    assert len(weyl_orbit(rs, vec((3, 2, 1)))) == 48


coords2 = st.tuples(st.integers(0, 3), st.integers(0, 3))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["A2", "B2", "C2", "A1xA1"]), coords2)
def test_freudenthal_dimension_is_weyl_dimension(name, coords):
    rs = parse_root_system(name)
    hw = highest_from_varpi(rs, coords)
    fs = multiplicities_split(rs, hw)
    assert fs.dimension == weyl_dimension(rs, hw)
    # multiplicities are W-invariant
    for w, m in fs.multiplicities.items():
        for a in rs.simple_roots:
            c = 2 * sum(x * y for x, y in zip(w, a)) / sum(y * y for y in a)
            assert fs.multiplicities[tuple(x - c * y for x, y in zip(w, a))] == m


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["A2", "B2", "BC2"]), coords2)
def test_weight_set_is_w_invariant(name, coords):
    rs = parse_root_system(name)
    ws = weight_set(rs, highest_from_varpi(rs, coords))
    assert is_w_invariant(rs, ws.weights)
    assert ws.highest in ws.weights


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(-4, 4), st.integers(-4, 4)))
def test_dominance_hull_matches_lp(mu):
    rs = build_root_system("B", 2)
    hw = highest_from_varpi(rs, (1, 2))
    assert in_hull_dominance(rs, hw, vec(mu)) == in_hull_lp(rs, hw, vec(mu))
