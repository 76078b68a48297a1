"""Acceptance criteria 1-9.  Each test records one PASS/FAIL line."""

import itertools
import time

import numpy as np

from proper_affine.affine_dynamics import (
    additivity_experiment,
    cartan_projection,
    jordan_projection,
    margulis_invariant,
    ideal_split,
    random_rho_regular,
)
from proper_affine.concrete_rep import check_criterion, fixture, vt0_basis
from proper_affine.group_builder import build_family, properness_heuristic, word_survey
from proper_affine.rep_weights import highest_from_varpi, multiplicities_split, weight_set, weyl_dimension
from proper_affine.root_system import parse_root_system, vec
from proper_affine.x0_select import (
    certify,
    depart_pairs,
    extremize,
    is_extreme,
    is_generically_symmetric,
    pi_of,
    select_x0,
    type_partition,
    vector_predicates,
)

RUNTIME_WEIGHTS = 5.0
RUNTIME_ADDITIVITY = 60.0
RUNTIME_SURVEY = 120.0
TOL_WITNESS = 1e-8
TOL_JD = 1e-5
TOL_CT = 1e-8
TOL_M = 1e-6
TOL_TRAPEZOID = 1e-6
TOL_LINEAR = 1e-6
INVERSE_SAMPLES = 100
INVERSE_FIXTURES = ("so21", "sl3s3", "sl2adj", "sl3adj", "so21adj", "so32adj")


def _timed_weights(name, highest):
    rs = parse_root_system(name)
    t = time.perf_counter()
    ws = weight_set(rs, highest)
    fs = multiplicities_split(rs, highest)
    return rs, ws, fs, time.perf_counter() - t


def test_criterion_1_weight_sets(acceptance):
    checks = []
    # 5 varpi_1 + varpi_3 = 4e1 - e2 - e3 - 2e4: the only A3 weight with 119 weights and dimension 189
    rs, ws, fs, dt = _timed_weights("A3", highest_from_varpi(parse_root_system("A3"), (5, 0, 1)))
    checks.append(len(ws) == 119 and fs.dimension == 189 and weyl_dimension(rs, ws.highest) == 189)
    checks.append(fs.weights == ws.weights and dt < RUNTIME_WEIGHTS)

    rs, ws, fs, dt = _timed_weights("C4", vec((1, 1, 1, 1)))
    by_support = {}
    for w, m in fs.multiplicities.items():
        by_support.setdefault(sum(1 for c in w if c), []).append(m)
    checks.append(len(by_support[4]) == 16 and set(by_support[4]) == {1})
    checks.append(len(by_support[2]) == 24 and set(by_support[2]) == {1})
    checks.append(by_support[0] == [2] and fs.dimension == 42 and dt < RUNTIME_WEIGHTS)

    rs, ws, fs, dt = _timed_weights("A2", highest_from_varpi(parse_root_system("A2"), (3, 0)))
    zero = vec((0, 0, 0))
    checks.append(fs.dimension == 10 and fs.multiplicities[zero] == 1 and dt < RUNTIME_WEIGHTS)

    ok = all(checks)
    acceptance(1, ok, f"A3 119/189, C4 16+24+0x2=42, A2 Sym3 10 with m(0)=1 ({sum(checks)}/{len(checks)} checks)")
    assert ok


def test_criterion_2_x0_pipeline(acceptance):
    rs = parse_root_system("C4")
    omega = weight_set(rs, vec((1, 1, 1, 1)))
    expected = {(4, 2, 1, 0): (3,), (5, 3, 2, 1): (), (4, 3, 2, 0): (3,)}
    rng = np.random.default_rng(0)
    checks = []
    for rep, pi in expected.items():
        x = vec(rep)
        checks.append(is_extreme(rs, omega, x) and is_generically_symmetric(rs, omega, x))
        # same-type vectors drawn at random must extremize to a representative with the same Pi
        part = type_partition(omega, x)
        found = 0
        while found < 5:
            cand = vec(sorted(rng.integers(0, 60, size=4).tolist(), reverse=True))
            if type_partition(omega, cand) != part:
                continue
            found += 1
            y = extremize(rs, omega, cand)
            checks.append(is_extreme(rs, omega, y) and pi_of(rs, y) == pi and type_partition(omega, y) == part)

    x0 = vec((5, 3, 2, 1))
    weak, strong, _, _ = depart_pairs(rs, omega, x0)
    target = (vec((1, -1, -1, 1)), vec((1, -1, -1, -1)))
    checks.append(weak[3] == target and strong[3] == target)
    checks.append(certify(rs, omega, x0).pairs_weak[3] == target)
    ok = all(checks)
    acceptance(2, ok, f"C4 Pi = {{2e4}}, empty, {{2e4}}; pair (e1-e2-e3+e4, e1-e2-e3-e4) ({sum(checks)}/{len(checks)})")
    assert ok


def test_criterion_3_swinging_counterexample(acceptance):
    rs = parse_root_system("A3")
    omega = weight_set(rs, vec((4, -1, -1, -2)))
    cert = certify(rs, omega, vec((10, 1, -1, -10)))
    pred = vector_predicates(cert, (16, 2, -3, -15))
    vanishing = {tuple(int(c) for c in w) for w in pred.vanishing_weights}
    ok = pred.asymptotically_contracting and not pred.rho_regular and (-1, -1, 4, -2) in vanishing
    acceptance(3, ok, f"contracting={pred.asymptotically_contracting} rho_regular={pred.rho_regular} vanishing={sorted(vanishing)}")
    assert ok


def test_criterion_4_criterion_table(acceptance):
    expected = {
        "sl3s3": True,
        "so21": True,
        "sl2adj": True,
        "sl3adj": True,
        "so21adj": True,
        "so32adj": True,
        "sl3trivial": False,
        "so3": False,
    }
    got, residuals = {}, []
    for name in expected:
        rep = fixture(name)
        rpt = check_criterion(rep)
        got[name] = rpt.holds
        if rpt.holds:
            residuals.append(rpt.residual)
    # the S3 witness is the monomial e1 e2 e3, which w0 sends to its negative
    rep = fixture("sl3s3")
    rpt = check_criterion(rep)
    mono = rep.basis @ rpt.witness
    target = np.zeros_like(mono)
    target[4] = 1.0
    in_span = abs(abs(mono @ target) - np.linalg.norm(mono)) <= TOL_WITNESS
    w0 = rpt.w0_matrix
    np.testing.assert_allclose(w0, [[0, 0, -1], [0, 1, 0], [1, 0, 0]])
    moved = np.linalg.norm(rep.rho(w0) @ rpt.witness + rpt.witness) <= TOL_WITNESS
    ok = got == expected and max(residuals) <= TOL_WITNESS and in_span and moved
    acceptance(4, ok, f"table {got}, max witness residual {max(residuals):.2e}")
    assert ok


def test_criterion_5_inverse_identities(acceptance):
    worst = {"jd": 0.0, "ct": 0.0, "m": 0.0}
    count = 0
    for name in INVERSE_FIXTURES:
        rep = fixture(name)
        cert = select_x0(rep.rs, rep.omega, 0)
        vt0 = vt0_basis(rep)
        w0 = np.array(rep.rs.w0, dtype=float)
        w0v = rep.w0_rep
        rng = np.random.default_rng(2024)
        for _ in range(INVERSE_SAMPLES):
            g = random_rho_regular(rep, cert, rng, 1.0)
            inv = g.inverse()
            jd = jordan_projection(rep, g.std).value
            jdi = jordan_projection(rep, inv.std).value
            worst["jd"] = max(worst["jd"], float(np.linalg.norm(jdi + w0 @ jd)))
            ct = cartan_projection(rep, g.std)
            cti = cartan_projection(rep, inv.std)
            worst["ct"] = max(worst["ct"], float(np.linalg.norm(cti + w0 @ ct)))
            m = margulis_invariant(rep, ideal_split(rep, cert, g), g, vt0).m
            mi = margulis_invariant(rep, ideal_split(rep, cert, inv), inv, vt0).m
            worst["m"] = max(worst["m"], float(np.linalg.norm(mi + w0v @ m)))
            count += 1
    ok = worst["jd"] <= TOL_JD and worst["ct"] <= TOL_CT and worst["m"] <= TOL_M
    acceptance(5, ok, f"{count} elements, max errors Jd {worst['jd']:.2e} Ct {worst['ct']:.2e} M {worst['m']:.2e}")
    assert ok


ADDITIVITY_SETUP = {"so21": 0.6, "sl3s3": 0.4}
ADDITIVITY_PAIRS = 8
ADDITIVITY_POWERS = (4, 8, 16)


def test_criterion_6_additivity_substitute(acceptance, baseline):
    t = time.perf_counter()
    checks, details = [], []
    for name, y_scale in ADDITIVITY_SETUP.items():
        rep = fixture(name)
        cert = select_x0(rep.rs, rep.omega, 0)
        pairs = []
        for seed in range(ADDITIVITY_PAIRS):
            fam = build_family(
                rep, cert, k=2, power=1, seed=seed, y_scale=y_scale, s_threshold=float("inf"), min_angle=0.2
            )
            pairs.append(tuple(fam.gens))
        rows = additivity_experiment(rep, cert, pairs, ADDITIVITY_POWERS)
        checks.append(all(r.product_regular for r in rows))
        max_dev = max(r.dev_m for r in rows)
        within, base = baseline(f"additivity_{name}", max_dev)
        checks.append(within)
        # ||M(g^N)|| / N is constant across N
        for trial in range(ADDITIVITY_PAIRS):
            per = [r.norm_m_g / r.power for r in rows if r.trial == trial]
            checks.append(max(per) - min(per) <= TOL_LINEAR * max(1.0, max(per)))
        slack = max(r.trapezoid_max for r in rows)
        checks.append(slack <= TOL_TRAPEZOID)
        details.append(f"{name} max dev {max_dev:.3g} (baseline {base:.3g}) trapezoid {slack:.2e}")
    dt = time.perf_counter() - t
    checks.append(dt < RUNTIME_ADDITIVITY)
    ok = all(checks)
    acceptance(6, ok, "; ".join(details) + f"; {dt:.1f}s")
    assert ok


def test_criterion_7_word_survey(acceptance):
    t = time.perf_counter()
    rep = fixture("so21")
    cert = select_x0(rep.rs, rep.omega, 0)
    fam = build_family(rep, cert, k=2, power=8, seed=0)
    survey = word_survey(fam, 6)
    dt = time.perf_counter() - t
    ok = fam.passes and survey.regular_ok and survey.contraction_ok and survey.deviation_ok and dt < RUNTIME_SURVEY
    acceptance(7, ok, f"{len(survey.records)} words, k_hat {survey.k_hat:.3g}, {dt:.1f}s")
    assert ok


def test_criterion_8_properness(acceptance):
    rep = fixture("so21")
    cert = select_x0(rep.rs, rep.omega, 0)
    good = properness_heuristic(build_family(rep, cert, seed=0), max_len=5, sample_points=64)
    bad = properness_heuristic(build_family(rep, cert, seed=0, sabotage=True), max_len=5, sample_points=64)
    min_disp = min(good.min_displacement.values())
    ok = good.passes and min_disp > 0 and not bad.passes
    acceptance(8, ok, f"min displacement {min_disp:.3g}; sabotaged family fails at {bad.witness}")
    assert ok


SWEEP = ("A1", "A2", "A3", "B2", "B3", "C2", "C3", "D3", "A1xA1", "A1xA2", "A1xB2", "A1xA1xA1")


def test_criterion_9_oracle_equivalence(acceptance):
    total, mismatches = 0, []
    for name in SWEEP:
        rs = parse_root_system(name)
        for coords in itertools.product(range(4), repeat=rs.rank):
            hw = highest_from_varpi(rs, coords)
            total += 1
            if weight_set(rs, hw).weights != multiplicities_split(rs, hw).weights:
                mismatches.append((name, coords))
    ok = not mismatches
    acceptance(9, ok, f"{total} highest weights over rank <= 3, {len(mismatches)} mismatches")
    assert ok
