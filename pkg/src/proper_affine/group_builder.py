"""Free affine groups with prescribed Margulis invariant, word surveys and a properness proxy."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .affine_dynamics import (
    AffineMap,
    affine_contraction_strength,
    ideal_split,
    margulis_invariant,
    nondegeneracy_bound,
)
from .concrete_rep import ConcreteRep, check_criterion, vt0_basis
from .errors import BadInput, NearDegenerate, NotApplicable, PropertyViolation
from .x0_select import X0Certificate, compatible_cone_sample

THREADS_ENV = "PROPER_AFFINE_THREADS"
H4_TOL = 1e-8


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise BadInput(f"{THREADS_ENV} must be a positive integer") from exc
    if n < 1:
        raise BadInput(f"{THREADS_ENV} must be a positive integer")
    return n


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class WordSpec:
    letters: tuple[tuple[int, int], ...]

    @property
    def length(self) -> int:
        return len(self.letters)

    @property
    def is_reduced(self) -> bool:
        return all(a[0] != b[0] or a[1] != -b[1] for a, b in zip(self.letters, self.letters[1:]))

    @property
    def is_cyclically_reduced(self) -> bool:
        if not self.is_reduced:
            return False
        if self.length < 2:
            return True
        first, last = self.letters[0], self.letters[-1]
        return not (first[0] == last[0] and first[1] == -last[1])

    def core(self) -> "WordSpec":
        """Cyclically reduced core: strip mutually inverse first/last letters."""
        w = self.letters
        while len(w) >= 2 and w[0][0] == w[-1][0] and w[0][1] == -w[-1][1]:
            w = w[1:-1]
        return WordSpec(w)

    def inverse(self) -> "WordSpec":
        return WordSpec(tuple((i, -s) for i, s in reversed(self.letters)))

    def __str__(self) -> str:
        return "*".join(f"g{i + 1}" + ("" if s > 0 else "^-1") for i, s in self.letters) or "id"

    @classmethod
    def parse(cls, text: str) -> "WordSpec":
        letters = []
        for tok in text.split("*"):
            tok = tok.strip()
            sign = -1 if tok.endswith("^-1") else 1
            core = tok[:-3] if sign < 0 else tok
            if not core.startswith("g") or not core[1:].isdigit() or int(core[1:]) < 1:
                raise BadInput(f"bad letter {tok!r}")
            letters.append((int(core[1:]) - 1, sign))
        return cls(tuple(letters))


def _letters(k: int) -> list[tuple[int, int]]:
    return [(i, s) for i in range(k) for s in (1, -1)]


def enumerate_words(k: int, max_len: int, mode: str = "reduced") -> Iterator[WordSpec]:
    """All reduced (or cyclically reduced) words of length 1..max_len, shortest first."""
    if max_len < 1:
        raise BadInput("max_len must be at least 1")
    if k < 1:
        raise BadInput("need at least one generator")
    if mode not in ("reduced", "cyclically_reduced"):
        raise BadInput(f"unknown word mode {mode!r}")
    alphabet = _letters(k)
    level = [(a,) for a in alphabet]
    for length in range(1, max_len + 1):
        for w in level:
            spec = WordSpec(w)
            if mode == "reduced" or spec.is_cyclically_reduced:
                yield spec
        if length < max_len:
            level = [w + (a,) for w in level for a in alphabet if not (a[0] == w[-1][0] and a[1] == -w[-1][1])]


def reduced_count(k: int, length: int) -> int:
    return 2 * k * (2 * k - 1) ** (length - 1)


def brute_force_words(k: int, length: int, mode: str) -> list[WordSpec]:
    """Filter of all (2k)^length raw words; an oracle for enumerate_words."""
    out = []
    for w in itertools.product(_letters(k), repeat=length):
        spec = WordSpec(w)
        if spec.is_reduced and (mode == "reduced" or spec.is_cyclically_reduced):
            out.append(spec)
    return out


# ---------------------------------------------------------------------------
# generator families


@dataclass
class GeneratorFamily:
    rep: ConcreteRep = field(repr=False)
    cert: X0Certificate = field(repr=False)
    gens: list[AffineMap] = field(repr=False)
    c_bound: float
    s_threshold: float
    m_c: np.ndarray
    power_used: int
    seed: int
    h1: bool = False
    h2: bool = False
    h3: bool = False
    h4: bool = False
    nondeg: dict = field(default_factory=dict)
    s_values: dict = field(default_factory=dict)
    m_errors: list = field(default_factory=list)
    min_angle: float = 0.0

    @property
    def k(self) -> int:
        return len(self.gens)

    @property
    def passes(self) -> bool:
        return self.h1 and self.h2 and self.h3 and self.h4

    def letter(self, i: int, s: int) -> AffineMap:
        return self.gens[i] if s > 0 else self._inverses[i]

    def __post_init__(self):
        self._inverses = [g.inverse() for g in self.gens]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "power": self.power_used,
            "seed": self.seed,
            "c_bound": self.c_bound,
            "s_threshold": self.s_threshold,
            "m_c": self.m_c.tolist(),
            "hypotheses": {"H1": self.h1, "H2": self.h2, "H3": self.h3, "H4": self.h4},
            "nondeg": self.nondeg,
            "s_values": self.s_values,
            "m_errors": self.m_errors,
            "min_angle": self.min_angle,
            "generators": [g.mat.ravel().tolist() for g in self.gens],
        }


def fixed_witness(rep: ConcreteRep, vt0: np.ndarray | None = None) -> np.ndarray:
    """Unit vector of V^t_0 fixed by -w0, or NotApplicable when there is none."""
    report = check_criterion(rep)
    if not report.holds:
        raise NotApplicable("criterion fails: V^t_0 is not moved by w0")
    b = vt0_basis(rep) if vt0 is None else vt0
    w0 = rep.w0_rep
    best = None
    for cand in [report.witness] + [b[:, i] for i in range(b.shape[1])]:
        m = (cand - w0 @ cand) / 2
        m = b @ (b.T @ m)
        if best is None or np.linalg.norm(m) > np.linalg.norm(best):
            best = m
    if np.linalg.norm(best) < 1e-8:
        raise NotApplicable("no nonzero -w0 fixed vector in V^t_0")
    return best / np.linalg.norm(best)


def _spaces_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Smallest principal angle between two subspaces (0 when they meet)."""
    if a.shape[1] == 0 or b.shape[1] == 0:
        return math.pi / 2
    s = np.linalg.svd(a.T @ b, compute_uv=False)
    return float(math.acos(min(1.0, float(np.max(s)))))


def build_family(
    rep: ConcreteRep,
    cert: X0Certificate,
    k: int = 2,
    power: int = 8,
    m_norm: float = 1.0,
    seed: int = 0,
    y_scale: float = 0.4,
    s_threshold: float = 0.25,
    c_limit: float = 100.0,
    min_angle: float = 0.6,
    max_retries: int = 200,
    sabotage: bool = False,
) -> GeneratorFamily:
    """k generators tau_{phi_i^-1(M_C)} o gamma_i^N with gamma_i = k_i exp(Y) k_i^-1.

    ``sabotage`` negates the prescribed invariant of the second generator.
    """
    if k < 2:
        raise BadInput("need k >= 2 generators for a nonabelian free group")
    if power < 1:
        raise BadInput("power must be positive")
    vt0 = vt0_basis(rep)
    m_c = m_norm * fixed_witness(rep, vt0)
    y = np.array([float(c) for c in compatible_cone_sample(cert, seed)])
    y = y_scale * y / np.linalg.norm(y)
    fam = rep.fam
    rng = np.random.default_rng(seed)
    core = fam.exp_cartan(power * y)
    last_fail = None
    for _ in range(max_retries):
        ks = [fam.random_k(rng) for _ in range(k)]
        stds = [kk @ core @ kk.T for kk in ks]
        lin = [AffineMap.from_group(rep, s) for s in stds]
        try:
            splits = [ideal_split(rep, cert, g) for g in lin]
        except (NearDegenerate, NotApplicable) as exc:
            last_fail = str(exc)
            continue
        gens = []
        for i, (g, sp) in enumerate(zip(lin, splits)):
            target = -m_c if sabotage and i == 1 else m_c
            shift = np.linalg.solve(sp.phi.linear, target)
            gens.append(g.with_translation(shift))
        letters = [(i, s) for i in range(k) for s in (1, -1)]
        elems = {(i, 1): gens[i] for i in range(k)}
        elems.update({(i, -1): gens[i].inverse() for i in range(k)})
        try:
            lsplits = {key: ideal_split(rep, cert, g) for key, g in elems.items()}
        except (NearDegenerate, NotApplicable) as exc:
            last_fail = str(exc)
            continue
        angle = math.pi / 2
        nondeg = {}
        worst = (0.0, None)
        bad_pair = None
        for a, b in itertools.product(letters, repeat=2):
            if a[0] == b[0] and a[1] == -b[1]:
                continue
            sa, sb = lsplits[a], lsplits[b]
            if a != b:
                angle = min(angle, _spaces_angle(sa.v_gg, sb.v_ll), _spaces_angle(sa.v_ll, sb.v_gg))
            try:
                nu = nondegeneracy_bound(sa.a_gtr, sb.a_lesssim, sa.idx)
            except PropertyViolation:
                nu = math.inf
            key = f"{WordSpec((a,))}|{WordSpec((b,))}"
            nondeg[key] = nu
            if nu > worst[0]:
                worst = (nu, key)
            if nu > c_limit:
                bad_pair = key
        if angle < min_angle or bad_pair is not None:
            last_fail = f"transversality failed for pair {bad_pair or 'angles'} (min angle {angle:.3g})"
            continue
        s_vals = {
            str(WordSpec((key,))): affine_contraction_strength(lsplits[key], g) for key, g in elems.items()
        }
        m_err = []
        for i in range(k):
            m = margulis_invariant(rep, lsplits[(i, 1)], gens[i], vt0).m
            m_err.append(float(np.linalg.norm(m - m_c)))
        family = GeneratorFamily(
            rep=rep,
            cert=cert,
            gens=gens,
            c_bound=worst[0],
            s_threshold=s_threshold,
            m_c=m_c,
            power_used=power,
            seed=seed,
            h1=True,
            h2=all(v <= c_limit for v in nondeg.values()),
            h3=all(v <= s_threshold for v in s_vals.values()),
            h4=all(e <= H4_TOL for e in m_err),
            nondeg=nondeg,
            s_values=s_vals,
            m_errors=m_err,
            min_angle=angle,
        )
        if not family.h3:
            raise PropertyViolation(
                f"increase power: contraction strengths {max(s_vals.values()):.3g} exceed {s_threshold}"
            )
        return family
    raise PropertyViolation(f"generator recipe failed after {max_retries} retries: {last_fail}")


# ---------------------------------------------------------------------------
# word evaluation


def evaluate_word(family: GeneratorFamily, word: WordSpec) -> AffineMap:
    """Left-to-right product of letters; the inverse is accumulated alongside."""
    d = family.rep.dim_v
    n = family.rep.fam.n
    out = AffineMap(np.eye(d + 1), np.eye(n), np.eye(n), np.eye(d + 1))
    for i, s in word.letters:
        out = out @ family.letter(i, s)
    return out


@dataclass
class WordRecord:
    word: str
    length: int
    regular: bool
    s: float
    norm_m: float
    deviation: float
    error: str | None = None


def _survey_one(family: GeneratorFamily, vt0: np.ndarray, word: WordSpec) -> WordRecord:
    g = evaluate_word(family, word)
    try:
        sp = ideal_split(family.rep, family.cert, g)
        m = margulis_invariant(family.rep, sp, g, vt0).m
        s = affine_contraction_strength(sp, g)
    except (NotApplicable, NearDegenerate, PropertyViolation) as exc:
        return WordRecord(str(word), word.length, False, math.nan, math.nan, math.nan, str(exc))
    dev = float(np.linalg.norm(m - word.length * family.m_c))
    return WordRecord(str(word), word.length, True, s, float(np.linalg.norm(m)), dev)


@dataclass
class SurveyReport:
    records: list[WordRecord]
    per_length: dict
    k_hat: float
    regular_ok: bool
    contraction_ok: bool
    deviation_ok: bool

    @property
    def passes(self) -> bool:
        return self.regular_ok and self.contraction_ok and self.deviation_ok

    def summary(self) -> dict:
        return {
            "words": len(self.records),
            "per_length": self.per_length,
            "k_hat": self.k_hat,
            "regular_ok": self.regular_ok,
            "contraction_ok": self.contraction_ok,
            "deviation_ok": self.deviation_ok,
            "passes": self.passes,
            "violations": [r.word for r in self.records if not r.regular],
        }

    def csv_rows(self) -> list[list[str]]:
        rows = [["word", "length", "s", "norm_M", "deviation"]]
        for r in self.records:
            rows.append([r.word, str(r.length), repr(r.s), repr(r.norm_m), repr(r.deviation)])
        return rows


def word_survey(family: GeneratorFamily, max_len: int, threads: int | None = None) -> SurveyReport:
    """rho-regularity, contraction and Margulis drift for every cyclically reduced word."""
    words = list(enumerate_words(family.k, max_len, "cyclically_reduced"))
    vt0 = vt0_basis(family.rep)
    n = thread_count() if threads is None else threads
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            records = list(pool.map(lambda w: _survey_one(family, vt0, w), words))
    else:
        records = [_survey_one(family, vt0, w) for w in words]
    per_length = {}
    for length in range(1, max_len + 1):
        rs = [r for r in records if r.length == length and r.regular]
        per_length[length] = {
            "count": sum(1 for r in records if r.length == length),
            "max_s": max((r.s for r in rs), default=math.nan),
            "max_deviation": max((r.deviation for r in rs), default=math.nan),
            "min_norm_m": min((r.norm_m for r in rs), default=math.nan),
        }
    regular_ok = all(r.regular for r in records)
    k_hat = 2 * per_length[2]["max_deviation"] if max_len >= 2 else 0.0
    contraction_ok = all(
        v["max_s"] <= family.s_threshold * 2.0 ** (-(length - 1)) for length, v in per_length.items()
    )
    deviation_ok = all(
        v["max_deviation"] <= (length - 1) * k_hat + H4_TOL for length, v in per_length.items()
    )
    return SurveyReport(records, per_length, k_hat, regular_ok, contraction_ok, deviation_ok)


# ---------------------------------------------------------------------------
# properness proxy


@dataclass
class PropernessReport:
    passes: bool
    min_displacement: dict
    min_drift: dict
    delta: dict
    witness: str | None
    free_ok: bool
    collision: tuple[str, str] | None
    max_leakage: float

    def to_json(self) -> dict:
        return {
            "passes": self.passes,
            "min_displacement": self.min_displacement,
            "min_drift": self.min_drift,
            "delta": self.delta,
            "witness": self.witness,
            "free_ok": self.free_ok,
            "collision": list(self.collision) if self.collision else None,
            "max_leakage": self.max_leakage,
        }


def properness_heuristic(
    family: GeneratorFamily,
    max_len: int = 5,
    sample_points: int = 64,
    radius: float = 1.0,
    seed: int = 0,
    ratio: float = 0.5,
    tol_leak: float = 1e-2,
) -> PropernessReport:
    """Displacement and V^t_0 drift of every reduced word on a ball of sample points.

    The drift of w at x is the V^t_0 component of phi_w(w(x)) - phi_w(x) for a
    canonizing map phi_w; a word of length l passes when every drift is at
    least delta(l) = ratio * l * ||M_C||, with l the length of the cyclically
    reduced core of w (conjugate words share their invariant).  This is a proxy for properness, not a proof.
    """
    rep = family.rep
    vt0 = vt0_basis(rep)
    pt = vt0 @ vt0.T
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((sample_points, rep.dim_v))
    pts = radius * pts / np.linalg.norm(pts, axis=1, keepdims=True) * rng.random((sample_points, 1)) ** (1 / rep.dim_v)
    words = list(enumerate_words(family.k, max_len, "reduced"))
    mnorm = float(np.linalg.norm(family.m_c))
    min_disp: dict = {}
    min_drift: dict = {}
    delta = {length: ratio * length * mnorm for length in range(1, max_len + 1)}
    witness = None
    max_leak = 0.0
    images = np.empty((len(words), sample_points * rep.dim_v))
    for wi, word in enumerate(words):
        g = evaluate_word(family, word)
        moved = pts @ g.linear.T + g.translation
        images[wi] = moved.ravel()
        disp = float(np.min(np.linalg.norm(moved - pts, axis=1)))
        try:
            sp = ideal_split(rep, family.cert, g, tol_leak=tol_leak)
            max_leak = max(max_leak, sp.leakage)
            drift = float(np.min(np.linalg.norm((moved - pts) @ (pt @ sp.phi.linear).T, axis=1)))
        except (NotApplicable, NearDegenerate):
            drift = 0.0
        length = word.length
        core = word.core().length
        min_disp[length] = min(min_disp.get(length, math.inf), disp)
        min_drift[length] = min(min_drift.get(length, math.inf), drift)
        if witness is None and (drift < delta[core] or disp <= 0):
            witness = str(word)
    collision = None
    scale = np.maximum(1.0, np.abs(images).max(axis=1))
    for a in range(len(words)):
        diff = np.abs(images[a + 1 :] - images[a]).max(axis=1) / np.maximum(scale[a + 1 :], scale[a])
        hit = np.nonzero(diff <= 1e-6)[0]
        if hit.size:
            collision = (str(words[a]), str(words[a + 1 + hit[0]]))
            break
    return PropernessReport(
        witness is None and collision is None, min_disp, min_drift, delta, witness, collision is None, collision, max_leak
    )
