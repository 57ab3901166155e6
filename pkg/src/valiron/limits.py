"""Boundary-limit estimation along structured approach families.

A scalar function on the Siegel domain is probed along finite sequence
families that play the role of the quantifiers in the K-limit, E-limit and
E0-limit definitions:

* ``koranyi``                  tails inside K(INFINITY, M)       -> K-limit
* ``c-special-restricted``     bounded distance to the axis      -> E-limit
* ``zero-special-restricted``  vanishing distance to the axis    -> E0-limit
* ``radial``                   (r, 0) with r real                -> baseline

Every generated sequence re-classifies (dynamics.classify_sequence) as its
declared kind; verdicts are computed from tail values with an explicit
no-limit witness requirement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import tail_start
from .geometry import (
    DomainError,
    LinearProjectionAtInfinity,
    SiegelPoint,
    first_coordinate_projection,
    kobayashi_distance,
    left_inverse_value,
    norm_sq,
    project,
)
from .maps import HoloMap, _rng_for

DEFAULT_LADDER = tuple(10.0 ** k for k in range(1, 8))
DEFAULT_TOL = 1e-3
NO_LIMIT_FACTOR = 10.0
TAIL_VALUES = 3

M_SWEEP = (1.5, 2.0, 4.0, 8.0, 16.0)
C_SWEEP = (0.0, 0.25, 0.5, 1.0)
T_SWEEP = (0.0, 0.5, 1.0, 2.0)
# zero-special seeds must stay small enough that the generated sequences
# actually classify as special under the 1e-6 residual tolerance
C0_SWEEP = (0.0, 2.5e-4, 5.0e-4)


@dataclass(frozen=True)
class ApproachSeed:
    """One direction seed: polar angle of z, w strength, w direction."""

    theta: float
    s: float
    u: tuple

    def direction(self) -> np.ndarray:
        return np.asarray(self.u, dtype=np.complex128)


@dataclass(frozen=True)
class ApproachFamily:
    kind: str
    n_dim: int
    amplitude: float = 2.0
    c_param: float = 0.0
    t_param: float = 0.0
    ladder: tuple = DEFAULT_LADDER
    seeds: tuple = ()

    def __post_init__(self):
        if self.kind not in ("koranyi", "c-special-restricted", "zero-special-restricted", "radial"):
            raise DomainError(f"unknown approach kind {self.kind!r}")
        if self.kind == "koranyi" and not self.amplitude > 1.0:
            raise DomainError("koranyi amplitude must satisfy M > 1")
        if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise DomainError("scale ladder must increase")


def _unit_direction(n_dim: int, phase: float = 0.0) -> tuple:
    if n_dim == 1:
        return ()
    u = np.zeros(n_dim - 1, dtype=np.complex128)
    u[0] = np.exp(1j * phase)
    return tuple(u.tolist())


def radial_family(n_dim: int, ladder: tuple = DEFAULT_LADDER) -> ApproachFamily:
    return ApproachFamily(
        kind="radial",
        n_dim=n_dim,
        ladder=ladder,
        seeds=(ApproachSeed(0.0, 0.0, _unit_direction(n_dim)),),
    )


def _angled_seeds(n_dim: int, s: float, t_param: float):
    seeds = [ApproachSeed(0.0, 0.0, _unit_direction(n_dim))]
    thetas = [0.0]
    if t_param > 0.0:
        thetas += [math.atan(t_param), -math.atan(t_param)]
    if s > 0.0 and n_dim > 1:
        for th in thetas:
            seeds.append(ApproachSeed(th, s, _unit_direction(n_dim)))
        seeds.append(ApproachSeed(0.0, s, _unit_direction(n_dim, math.pi / 4.0)))
    elif t_param > 0.0:
        for th in thetas[1:]:
            seeds.append(ApproachSeed(th, 0.0, _unit_direction(n_dim)))
    return tuple(seeds)


def c_special_family(
    c_param: float, t_param: float, n_dim: int, ladder: tuple = DEFAULT_LADDER
) -> ApproachFamily:
    """Sequences at axis distance <= C: ||w_k|| = s sqrt(x_k), s = tanh C."""
    s = math.tanh(c_param)
    return ApproachFamily(
        kind="c-special-restricted",
        n_dim=n_dim,
        c_param=c_param,
        t_param=t_param,
        ladder=ladder,
        seeds=_angled_seeds(n_dim, s, t_param),
    )


def zero_special_family(
    c_param: float, t_param: float, n_dim: int, ladder: tuple = DEFAULT_LADDER
) -> ApproachFamily:
    """Special sequences: strengths decay as s/sqrt(k) along the ladder."""
    s = math.tanh(c_param)
    return ApproachFamily(
        kind="zero-special-restricted",
        n_dim=n_dim,
        c_param=c_param,
        t_param=t_param,
        ladder=ladder,
        seeds=_angled_seeds(n_dim, s, t_param),
    )


def koranyi_family(
    amplitude: float, n_dim: int, ladder: tuple = DEFAULT_LADDER
) -> ApproachFamily:
    """Sequences staying inside K(INFINITY, M); w fills the cross-section."""
    t_max = 0.75 * math.sqrt(amplitude * amplitude - 1.0)
    seeds = [
        ApproachSeed(0.0, 0.0, _unit_direction(n_dim)),
        ApproachSeed(0.0, 0.9, _unit_direction(n_dim)),
    ]
    if t_max > 0.0:
        seeds.append(ApproachSeed(math.atan(t_max), 0.9, _unit_direction(n_dim)))
        seeds.append(ApproachSeed(-math.atan(t_max), 0.5, _unit_direction(n_dim, math.pi / 3.0)))
    return ApproachFamily(
        kind="koranyi",
        n_dim=n_dim,
        amplitude=amplitude,
        ladder=ladder,
        seeds=tuple(seeds),
    )


def _point_for(family: ApproachFamily, seed: ApproachSeed, rung: int) -> SiegelPoint:
    r = family.ladder[rung]
    z = r * complex(math.cos(seed.theta), math.sin(seed.theta))
    x = z.real
    u = seed.direction()
    if family.n_dim == 1 or seed.s == 0.0:
        return SiegelPoint(z, np.zeros(family.n_dim - 1, dtype=np.complex128))
    if family.kind == "koranyi":
        margin = x - abs(z + 1.0) / family.amplitude
        wsq = seed.s * seed.s * max(margin, 0.0)
        return SiegelPoint(z, math.sqrt(wsq) * u)
    if family.kind == "zero-special-restricted":
        strength = seed.s / math.sqrt(rung + 1.0)
    else:
        strength = seed.s
    return SiegelPoint(z, strength * math.sqrt(x) * u)


def generate_sequences(
    family: ApproachFamily, count: Optional[int] = None, seed: int = 0
) -> list:
    """Deterministic list of sequences: canonical seeds first, then drawn.

    Drawn seeds use per-index counter-based randomness so the output is
    independent of evaluation order.
    """
    seeds = list(family.seeds)
    if count is None:
        count = len(seeds)
    if family.kind == "radial":
        count = min(count, 1) or 1
    while len(seeds) < count:
        rng = _rng_for(seed, len(seeds))
        if family.kind == "koranyi":
            t_max = 0.75 * math.sqrt(family.amplitude ** 2 - 1.0)
            s_max = 0.95
        else:
            t_max = family.t_param
            s_max = math.tanh(family.c_param)
        theta = rng.uniform(-math.atan(t_max), math.atan(t_max)) if t_max > 0 else 0.0
        s = rng.uniform(0.0, s_max) if s_max > 0 else 0.0
        phase = rng.uniform(0.0, 2.0 * math.pi)
        seeds.append(ApproachSeed(theta, s, _unit_direction(family.n_dim, phase)))
    seeds = seeds[:count]
    return [
        [_point_for(family, sd, k) for k in range(len(family.ladder))] for sd in seeds
    ]


@dataclass(frozen=True)
class LimitVerdict:
    """Outcome of a finite limit probe.

    status 'limit-exists' carries the mean tail value; 'no-limit' carries a
    witness pair taken from two distinct sequences whose tail values are
    separated by more than NO_LIMIT_FACTOR * tol; anything in between is
    'inconclusive'.
    """

    status: str
    value: Optional[complex]
    spread: float
    tol: float
    witness: Optional[tuple]
    tails: tuple

    @property
    def exists(self) -> bool:
        return self.status == "limit-exists"


def _verdict_from_tails(tails: Sequence[np.ndarray], tol: float) -> LimitVerdict:
    flat = np.concatenate([np.asarray(t) for t in tails])
    spread = 0.0
    for i in range(flat.size):
        spread = max(spread, float(np.max(np.abs(flat - flat[i]))))
    witness = None
    separation = 0.0
    for i in range(len(tails)):
        for j in range(i + 1, len(tails)):
            for vi in tails[i]:
                for vj in tails[j]:
                    d = abs(vi - vj)
                    if d > separation:
                        separation = d
                        witness = (i, j, complex(vi), complex(vj), float(d))
    if spread < tol:
        return LimitVerdict(
            status="limit-exists",
            value=complex(np.mean(flat)),
            spread=spread,
            tol=tol,
            witness=None,
            tails=tuple(np.asarray(t) for t in tails),
        )
    if witness is not None and separation > NO_LIMIT_FACTOR * tol:
        return LimitVerdict(
            status="no-limit",
            value=None,
            spread=spread,
            tol=tol,
            witness=witness,
            tails=tuple(np.asarray(t) for t in tails),
        )
    return LimitVerdict(
        status="inconclusive",
        value=None,
        spread=spread,
        tol=tol,
        witness=witness,
        tails=tuple(np.asarray(t) for t in tails),
    )


def family_label(family: ApproachFamily) -> str:
    if family.kind == "koranyi":
        return f"koranyi(M={family.amplitude:g})"
    if family.kind == "radial":
        return "radial"
    short = "c-special" if family.kind == "c-special-restricted" else "zero-special"
    return f"{short}(C={family.c_param:g};T={family.t_param:g})"


def probe_family(
    h: Callable[[SiegelPoint], complex],
    family: ApproachFamily,
    count: Optional[int] = None,
    seed: int = 0,
) -> list:
    """Full value traces of h, one array per generated sequence."""
    return [
        np.array([h(p) for p in seq], dtype=np.complex128)
        for seq in generate_sequences(family, count=count, seed=seed)
    ]


def verdict_from_traces(traces: Sequence[np.ndarray], tol: float) -> LimitVerdict:
    tails = [t[-min(TAIL_VALUES, t.size):] for t in traces]
    return _verdict_from_tails(tails, tol)


def estimate_limit(
    h: Callable[[SiegelPoint], complex],
    family: ApproachFamily,
    tol: float = DEFAULT_TOL,
    count: Optional[int] = None,
    seed: int = 0,
) -> LimitVerdict:
    """Probe h along one family; verdict from the last TAIL_VALUES rungs."""
    return verdict_from_traces(probe_family(h, family, count=count, seed=seed), tol)


def _sweep_verdict(h, families, tol, count, seed) -> LimitVerdict:
    traces = []
    for fam in families:
        traces.extend(probe_family(h, fam, count=count, seed=seed))
    return verdict_from_traces(traces, tol)


def k_limit(h, n_dim: int, tol: float = DEFAULT_TOL, ladder: tuple = DEFAULT_LADDER,
            count: Optional[int] = None, seed: int = 0) -> LimitVerdict:
    """K-limit surrogate: sweep Koranyi amplitudes M in M_SWEEP."""
    fams = [koranyi_family(m_amp, n_dim, ladder) for m_amp in M_SWEEP]
    return _sweep_verdict(h, fams, tol, count, seed)


def e_limit(h, n_dim: int, tol: float = DEFAULT_TOL, ladder: tuple = DEFAULT_LADDER,
            count: Optional[int] = None, seed: int = 0) -> LimitVerdict:
    """E-limit surrogate: sweep C-special restricted families over C x T."""
    fams = [
        c_special_family(c, t, n_dim, ladder)
        for c in C_SWEEP
        for t in T_SWEEP
    ]
    return _sweep_verdict(h, fams, tol, count, seed)


def e0_limit(h, n_dim: int, tol: float = DEFAULT_TOL, ladder: tuple = DEFAULT_LADDER,
             count: Optional[int] = None, seed: int = 0) -> LimitVerdict:
    """E0-limit surrogate: sweep zero-special families (small strengths)."""
    fams = [
        zero_special_family(c, t, n_dim, ladder)
        for c in C0_SWEEP
        for t in T_SWEEP
    ]
    return _sweep_verdict(h, fams, tol, count, seed)


# -- Boundary behavior checks --------------------------------------------------


@dataclass(frozen=True)
class JWCReport:
    """Both limits of the projection comparison theorem, probed along E0 families."""

    part1: LimitVerdict
    part2: LimitVerdict
    multiplier: float
    passed: bool


def projection_ratio_fn(m: HoloMap, rho: LinearProjectionAtInfinity):
    """h(q) = (rho~ o phi)(q) / rho~(q), the left-inverse comparison ratio."""

    def h(q: SiegelPoint) -> complex:
        return left_inverse_value(rho, m.evaluator(q)) / left_inverse_value(rho, q)

    return h


def projection_gap_fn(m: HoloMap, rho: LinearProjectionAtInfinity):
    """h(q) = ||phi(q) - rho(phi(q))|| / |rho~(q)|, the off-geodesic gap."""

    def h(q: SiegelPoint) -> complex:
        image = m.evaluator(q)
        proj = project(rho, image)
        dz = image.z - proj.z
        dw = image.w - proj.w
        return complex(math.sqrt(abs(dz) ** 2 + norm_sq(dw)) / abs(left_inverse_value(rho, q)))

    return h


def jwc_check(m: HoloMap, rho: LinearProjectionAtInfinity, tol: float = DEFAULT_TOL,
              ladder: tuple = DEFAULT_LADDER, seed: int = 0) -> JWCReport:
    """Check (1) E0-lim rho~ o phi / rho~ = lam and (2) E0-lim ||phi - rho o phi|| / |rho~| = 0."""
    if m.domain != "siegel":
        raise DomainError("jwc_check expects a Siegel-side map")

    v1 = e0_limit(projection_ratio_fn(m, rho), m.dim, tol=tol, ladder=ladder, seed=seed)
    v2 = e0_limit(projection_gap_fn(m, rho), m.dim, tol=tol, ladder=ladder, seed=seed)
    ok = (
        v1.exists
        and v2.exists
        and abs(v1.value - m.multiplier) <= tol
        and abs(v2.value) <= tol
    )
    return JWCReport(part1=v1, part2=v2, multiplier=m.multiplier, passed=ok)


@dataclass(frozen=True)
class ProjectionInvarianceReport:
    distances: np.ndarray
    max_tail: float
    monotone: bool
    passed: bool
    c_witness_axis: float
    c_witness_projected: float
    restricted_axis_t: float
    restricted_projected_t: float


def projection_distance(q: SiegelPoint, rho: LinearProjectionAtInfinity) -> float:
    """Closed-form k(p_1(Z), rho_a(Z)).

    With c = 2||a||^2 + 2<w, a>, the squared tanh of the distance is
    (|c|^2 + 4 x ||a||^2) / |2x + c|^2; this matches the two-point pipeline
    and stays stable at large |z| where ball coordinates cancel.
    """
    a = rho.a
    c = 2.0 * norm_sq(a) + 2.0 * complex(np.dot(q.w, np.conjugate(a)))
    x = q.z.real
    num = abs(c) ** 2 + 4.0 * x * norm_sq(a)
    den = abs(2.0 * x + c) ** 2
    if num >= den:
        return math.inf
    return math.atanh(math.sqrt(num / den))


def projection_invariance_check(
    points: Sequence[SiegelPoint],
    rho: LinearProjectionAtInfinity,
    tol: float = 1e-2,
) -> ProjectionInvarianceReport:
    """Distances between the two projections vanish along the sequence.

    Also compares the C-special witnesses measured against the axis and
    against the projected line, and the restriction witnesses of both
    shadows; the lemma says each pair must agree in the limit.
    """
    points = list(points)
    dists = np.array([projection_distance(q, rho) for q in points])
    t0 = tail_start(len(points))
    tail = dists[t0:]
    max_tail = float(np.max(tail))
    monotone = bool(np.all(np.diff(dists) <= 1e-12))

    p1 = first_coordinate_projection(points[0].dim)
    axis_d = [kobayashi_distance(q, project(p1, q)) for q in points[t0:]]
    proj_d = [kobayashi_distance(q, project(rho, q)) for q in points[t0:]]
    xs = np.array([q.z.real for q in points[t0:]])
    ys = np.array([q.z.imag for q in points[t0:]])
    lv = np.array([left_inverse_value(rho, q) for q in points[t0:]])
    return ProjectionInvarianceReport(
        distances=dists,
        max_tail=max_tail,
        monotone=monotone,
        passed=max_tail < tol,
        c_witness_axis=float(np.max(axis_d)),
        c_witness_projected=float(np.max(proj_d)),
        restricted_axis_t=float(np.max(np.abs(ys) / xs)),
        restricted_projected_t=float(np.max(np.abs(lv.imag) / lv.real)),
    )


@dataclass(frozen=True)
class LeftInverseReport:
    status: str
    ratio_verdict: Optional[LimitVerdict]
    derivative_verdict: Optional[LimitVerdict]
    prerequisite: LimitVerdict
    multiplier: float
    passed: bool


def left_inverse_ratio_check(
    m: HoloMap,
    rho: LinearProjectionAtInfinity,
    tol: float = DEFAULT_TOL,
    ladder: tuple = DEFAULT_LADDER,
    seed: int = 0,
) -> LeftInverseReport:
    """E-limit transfer: if phi_1/z has an E-limit, rho~ o phi / rho~ shares it.

    Returns status 'inconclusive' when the prerequisite E-limit does not
    exist along the sweep (no claim is made); otherwise verifies the ratio
    tends to the multiplier and the w-component growth ||phi_w|| / |z|
    tends to 0.
    """
    if m.domain != "siegel":
        raise DomainError("left_inverse_ratio_check expects a Siegel-side map")

    prereq = e_limit(lambda q: m.evaluator(q).z / q.z, m.dim, tol=tol, ladder=ladder, seed=seed)
    if not prereq.exists:
        return LeftInverseReport(
            status="inconclusive",
            ratio_verdict=None,
            derivative_verdict=None,
            prerequisite=prereq,
            multiplier=m.multiplier,
            passed=False,
        )

    def wgrowth(q: SiegelPoint) -> complex:
        return complex(math.sqrt(norm_sq(m.evaluator(q).w)) / abs(q.z))

    rv = e_limit(projection_ratio_fn(m, rho), m.dim, tol=tol, ladder=ladder, seed=seed)
    dv = e_limit(wgrowth, m.dim, tol=tol, ladder=ladder, seed=seed)
    ok = (
        rv.exists
        and dv.exists
        and abs(rv.value - m.multiplier) <= tol
        and abs(dv.value) <= tol
    )
    return LeftInverseReport(
        status="confirmed" if ok else "failed",
        ratio_verdict=rv,
        derivative_verdict=dv,
        prerequisite=prereq,
        multiplier=m.multiplier,
        passed=ok,
    )
