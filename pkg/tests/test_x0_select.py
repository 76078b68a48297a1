import pytest

from proper_affine.errors import BadInput, NotApplicable
from proper_affine.rep_weights import highest_from_varpi, weight_set
from proper_affine.root_system import add, build_root_system, parse_root_system, vec
from proper_affine.x0_select import (
    certify,
    compatible_cone_sample,
    extremize,
    find_generically_symmetric,
    fundamental_coweights,
    is_extreme,
    opposition,
    pi_from_missing_roots,
    select_x0,
    stabilizer_checks,
    type_partition,
    vector_predicates,
)

REPS = [
    ("A2", (1, 1)),
    ("A2", (3, 0)),
    ("A3", (5, 0, 1)),
    ("B2", (1, 0)),
    ("C3", (0, 2, 0)),
    ("D4", (0, 1, 0, 0)),
    ("A1xA1", (2, 2)),
]


def _omega(name, coords):
    rs = parse_root_system(name)
    return rs, weight_set(rs, highest_from_varpi(rs, coords))


@pytest.mark.parametrize("name,coords", REPS)
def test_selected_x0_is_certified(name, coords):
    rs, omega = _omega(name, coords)
    cert = select_x0(rs, omega, seed=3)
    assert cert.generically_symmetric and cert.extreme
    assert rs.is_dominant(cert.x0)
    assert all(stabilizer_checks(cert).values())
    assert set(cert.pairs_weak) == set(range(rs.rank)) - set(cert.pi_x0)


@pytest.mark.parametrize("name,coords", REPS)
def test_departure_pairs_shape(name, coords):
    rs, omega = _omega(name, coords)
    cert = select_x0(rs, omega)
    part = cert.partition
    zero = tuple(0 * c for c in cert.x0)
    for i, (ge, lt) in cert.pairs_weak.items():
        assert add(lt, rs.simple_roots[i]) == ge
        assert ge in part.ge and lt in part.lt
    for i, (ge, lt) in cert.pairs_strong.items():
        assert ge in part.gt or ge == zero
        assert (ge, lt) in cert.candidates_strong[i]
        # the reported pair has the lexicographically largest lambda^<
        assert lt == max(p[1] for p in cert.candidates_strong[i])


@pytest.mark.parametrize("name,coords", REPS)
def test_compatible_sample(name, coords):
    rs, omega = _omega(name, coords)
    cert = select_x0(rs, omega)
    y = compatible_cone_sample(cert, seed=1)
    pred = vector_predicates(cert, y)
    assert pred.compatible and pred.rho_regular and pred.asymptotically_contracting
    assert all(v > 0 for v in rs.simple_values(y))


def test_c4_extra_candidates_reported():
    rs = build_root_system("C", 4)
    omega = weight_set(rs, vec((1, 1, 1, 1)))
    cert = certify(rs, omega, vec((5, 3, 2, 1)))
    cands = cert.candidates_weak[3]
    assert (vec((-1, 1, 1, 1)), vec((-1, 1, 1, -1))) in cands
    assert cert.pairs_weak[3] == (vec((1, -1, -1, 1)), vec((1, -1, -1, -1)))


def test_a3_reference_vector():
    rs = build_root_system("A", 3)
    omega = weight_set(rs, vec((4, -1, -1, -2)))
    cert = certify(rs, omega, vec((10, 1, -1, -10)))
    assert cert.symmetric and cert.generically_symmetric and cert.extreme
    pred = vector_predicates(cert, (16, 2, -3, -15))
    assert pred.x0_regular and not pred.rho_regular and not pred.compatible
    assert vec((-1, -1, 4, -2)) in pred.vanishing_weights
    assert vector_predicates(cert, cert.x0).rho_regular


def test_float_predicates_tolerance():
    rs = build_root_system("A", 3)
    omega = weight_set(rs, vec((4, -1, -1, -2)))
    cert = certify(rs, omega, vec((10, 1, -1, -10)))
    pred = vector_predicates(cert, (16.0, 2.0, -3.0 + 1e-12, -15.0 - 1e-12))
    assert not pred.rho_regular
    pred = vector_predicates(cert, (16.0, 2.0, -3.0 + 1e-3, -15.0 - 1e-3))
    assert pred.rho_regular


def test_extremize_fixes_extreme_vectors():
    rs = build_root_system("C", 4)
    omega = weight_set(rs, vec((1, 1, 1, 1)))
    for x in [(4, 2, 1, 0), (5, 3, 2, 1), (4, 3, 2, 0)]:
        assert is_extreme(rs, omega, vec(x))
        assert extremize(rs, omega, vec(x)) == vec(x)


def test_extremize_averages_to_extreme():
    # the second factor acts trivially, so its reflection keeps the type but moves x
    rs, omega = _omega("A1xA1", (2, 0))
    x = vec((1, -1, 1, -1))
    assert not is_extreme(rs, omega, x)
    y = extremize(rs, omega, x)
    assert y == vec((1, -1, 0, 0))
    assert is_extreme(rs, omega, y)
    assert type_partition(omega, y) == type_partition(omega, x)


def test_coweights_and_opposition():
    rs = build_root_system("D", 5)
    cw = fundamental_coweights(rs)
    for i, w in enumerate(cw):
        assert rs.simple_values(w) == tuple(int(i == j) for j in range(5))
    assert opposition(rs) == (0, 1, 2, 4, 3)
    assert opposition(build_root_system("A", 3)) == (2, 1, 0)


def test_missing_roots_match_pi_for_adjoint():
    rs, omega = _omega("A2", (1, 1))
    assert pi_from_missing_roots(rs, omega) == ()
    assert select_x0(rs, omega).pi_x0 == ()


def test_not_applicable_and_bad_input():
    rs, omega = _omega("A2", (1, 0))
    with pytest.raises(NotApplicable):
        find_generically_symmetric(rs, omega)
    rs, omega = _omega("A2", (0, 0))
    with pytest.raises(NotApplicable):
        select_x0(rs, omega)
    rs, omega = _omega("A2", (1, 1))
    with pytest.raises(BadInput):
        certify(rs, omega, vec((1, 0, 0)))
    with pytest.raises(BadInput):
        certify(rs, omega, vec((1, -1)))


def test_seed_determinism():
    rs, omega = _omega("A3", (5, 0, 1))
    assert select_x0(rs, omega, seed=5).x0 == select_x0(rs, omega, seed=5).x0
