"""Orbit computation and asymptotic classification of Siegel-domain sequences.

A sequence tending to the vertex at infinity is classified three independent
ways and the verdicts are cross-checked:

(i)   membership of the tail in a Koranyi region K(INFINITY, M), sweeping a
      fixed M grid;
(ii)  boundedness of the Kobayashi distances to the first-coordinate axis,
      k(Z_n, p_1(Z_n)), computed through the full two-point machinery;
(iii) raw ratio bounds ||w_n||^2 <= a x_n (a < 1) and |y_n| <= T x_n.

These are equivalent characterizations; a disagreement outside the ambiguity
band is a defect, not a representable state, and raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import (
    DomainError,
    SiegelPoint,
    first_coordinate_projection,
    halfplane_distance,
    kobayashi_distance,
    koranyi_margin,
    koranyi_region_at_infinity,
    norm_sq,
    project,
    siegel_height,
)
from .maps import HoloMap, ScaleOverflowError, _rng_for

SPECIAL_RESIDUAL_TOL = 1e-6
AMBIGUITY_BAND = 1e-9
M_GRID = (1.1, 1.5, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0)
MIN_TAIL = 8
INFINITY_THRESHOLD = 100.0
MIN_ORBIT_FOR_ESTIMATES = 16


class NotTendingToInfinityError(ValueError):
    """The sequence tail does not escape toward the vertex at infinity."""


class AmbiguousClassificationError(ValueError):
    """A witness sits inside the tolerance band; no verdict is honest."""


class ClassificationDisagreementError(AssertionError):
    """The three classification routes disagree outside the band."""


class OrbitTooShortError(ValueError):
    """Estimator preconditions need a longer orbit."""


def tail_start(n: int) -> int:
    """Start index of the tail: the last half, at least MIN_TAIL terms."""
    return max(0, min(n - MIN_TAIL, n // 2))


@dataclass(frozen=True)
class Orbit:
    """Forward orbit of a Siegel-side map with cached coordinate arrays.

    ``cutoff`` records a scale overflow that truncated the orbit; the points
    kept are still exact images of each other.
    """

    map: HoloMap
    points: tuple
    x: np.ndarray
    y: np.ndarray
    w_norm_sq: np.ndarray
    cutoff: Optional[str] = None

    def __len__(self) -> int:
        return len(self.points)

    def spot_check(self, seed: int = 0, count: int = 3) -> float:
        """Re-evaluate the map on random indices; returns worst relative error."""
        if len(self.points) < 2:
            return 0.0
        rng = _rng_for(seed, 0)
        idx = rng.integers(0, len(self.points) - 1, size=count)
        worst = 0.0
        for i in idx:
            expect = self.points[i + 1]
            got = self.map.evaluator(self.points[i])
            scale = max(1.0, abs(expect.z))
            err = abs(got.z - expect.z) / scale
            if expect.w.size:
                err = max(err, float(np.max(np.abs(got.w - expect.w))) / scale)
            worst = max(worst, err)
        return worst


def compute_orbit(m: HoloMap, start: SiegelPoint, n_steps: int) -> Orbit:
    """Forward orbit [start, phi(start), ..., phi^n(start)].

    A scale overflow does not raise: the orbit is returned truncated with
    the cutoff recorded, since the prefix is still valid data.
    """
    if m.domain != "siegel":
        raise DomainError("orbits are computed on the Siegel side")
    pts = [start]
    cutoff = None
    cur = start
    for k in range(n_steps):
        if cur.z.real > 1e300:
            cutoff = f"scale overflow at step {k}"
            break
        try:
            cur = m.evaluator(cur)
        except (ScaleOverflowError, OverflowError):
            cutoff = f"scale overflow at step {k}"
            break
        if not (math.isfinite(cur.z.real) and math.isfinite(cur.z.imag)):
            cutoff = f"non-finite value at step {k}"
            pts.append(cur)
            break
        pts.append(cur)
    x = np.array([p.z.real for p in pts])
    y = np.array([p.z.imag for p in pts])
    wsq = np.array([norm_sq(p.w) for p in pts])
    return Orbit(map=m, points=tuple(pts), x=x, y=y, w_norm_sq=wsq, cutoff=cutoff)


@dataclass(frozen=True)
class SequenceClassification:
    """Three-way verdict with numeric witnesses.

    special: residual ||w_n||^2 / x_n vanishes along the tail.
    c_special: distances to the first-coordinate axis bounded by C.
    restricted: |y_n| <= T x_n along the tail.
    koranyi_m: least grid amplitude whose region contains the tail.
    """

    special: bool
    c_special: Optional[float]
    restricted: bool
    restricted_t: float
    koranyi_m: Optional[float]
    a_witness: float
    tail_start: int
    residuals: np.ndarray
    m_predicted: float


def _check_tends_to_infinity(points: Sequence[SiegelPoint], t0: int) -> None:
    mods = [abs(p.z) for p in points[t0:]]
    increasing = all(b > a * (1.0 - 1e-12) for a, b in zip(mods, mods[1:]))
    if not increasing or mods[-1] < INFINITY_THRESHOLD:
        raise NotTendingToInfinityError(
            "tail moduli must increase beyond "
            f"{INFINITY_THRESHOLD:g}; got final |z| = {mods[-1]!r}"
        )


def classify_sequence(points: Sequence[SiegelPoint]) -> SequenceClassification:
    """Classify a sequence tending to infinity; see module docstring.

    Raises NotTendingToInfinityError when the tail does not escape,
    AmbiguousClassificationError when a witness falls inside the band, and
    ClassificationDisagreementError if the three routes contradict each
    other outside the band (which would indicate a defect, not data).
    """
    points = tuple(points)
    if len(points) < 2:
        raise OrbitTooShortError("need at least 2 points to classify")
    t0 = tail_start(len(points))
    _check_tends_to_infinity(points, t0)
    tail = points[t0:]

    x = np.array([p.z.real for p in tail])
    y = np.array([p.z.imag for p in tail])
    wsq = np.array([norm_sq(p.w) for p in tail])

    # route (iii): raw ratio witnesses
    residuals = wsq / x
    a_w = float(np.max(residuals))
    t_w = float(np.max(np.abs(y) / x))

    if abs(a_w - 1.0) <= AMBIGUITY_BAND:
        raise AmbiguousClassificationError("||w||^2/x witness inside the band at 1")

    # route (ii): Kobayashi distance to the axis, through the full pipeline
    rho = first_coordinate_projection(tail[0].dim)
    dists = np.array([kobayashi_distance(p, project(rho, p)) for p in tail])
    c_w = float(np.max(dists)) if np.all(np.isfinite(dists)) else math.inf

    c_special_present = a_w < 1.0 and math.isfinite(c_w)
    # routes (ii) and (iii) must agree: max distance == atanh(sqrt(a))
    if c_special_present:
        expected_c = math.atanh(math.sqrt(a_w))
        if abs(expected_c - c_w) > 1e-6 * (1.0 + expected_c):
            raise ClassificationDisagreementError(
                f"axis-distance witness {c_w!r} vs ratio witness {expected_c!r}"
            )

    # route (i): least amplitude on the grid containing the whole tail
    koranyi_m = None
    for m_amp in M_GRID:
        region = koranyi_region_at_infinity(m_amp)
        margins = [koranyi_margin(region, p) for p in tail]
        scales = [max(1.0, abs(p.z)) for p in tail]
        if all(mg > AMBIGUITY_BAND * sc for mg, sc in zip(margins, scales)):
            koranyi_m = m_amp
            break
        if any(abs(mg) <= AMBIGUITY_BAND * sc for mg, sc in zip(margins, scales)):
            # boundary-grazing tail for this amplitude: not a clean witness
            continue

    m_pred = math.sqrt(1.0 + t_w * t_w) / (1.0 - a_w) if a_w < 1.0 else math.inf

    # cross-checks between the routes (Lemma-style conversions)
    if koranyi_m is not None:
        if not c_special_present:
            raise ClassificationDisagreementError("koranyi tail without axis bound")
        if a_w > (1.0 - 1.0 / koranyi_m) + AMBIGUITY_BAND:
            raise ClassificationDisagreementError(
                f"residual bound 1 - 1/M violated: a = {a_w!r}, M = {koranyi_m!r}"
            )
        if t_w > koranyi_m * (1.0 + AMBIGUITY_BAND):
            raise ClassificationDisagreementError(
                f"|y| <= M x violated: T = {t_w!r}, M = {koranyi_m!r}"
            )
    else:
        if c_special_present and m_pred * 1.05 <= M_GRID[-1]:
            raise ClassificationDisagreementError(
                f"bounds predict containment at M ~ {m_pred!r} but grid sweep failed"
            )
        if c_special_present:
            raise AmbiguousClassificationError(
                f"koranyi witness ~ {m_pred!r} beyond the amplitude grid"
            )

    special = bool(np.all(residuals < SPECIAL_RESIDUAL_TOL)) and residuals[-1] <= residuals[0]

    return SequenceClassification(
        special=special,
        c_special=c_w if c_special_present else None,
        restricted=c_special_present or koranyi_m is not None or t_w < math.inf,
        restricted_t=t_w,
        koranyi_m=koranyi_m,
        a_witness=a_w,
        tail_start=t0,
        residuals=residuals,
        m_predicted=m_pred,
    )


@dataclass(frozen=True)
class EstimateWithUncertainty:
    value: float
    uncertainty: float


@dataclass(frozen=True)
class DriftEstimate:
    """Drift estimate L with the q_n diagnostic sequence.

    q_n = x_{n+1}/x_n + i (y_{n+1} - y_n)/x_n tends to lam + i L (lam - 1);
    the half-plane distances k(1, q_n) are non-increasing for special
    orbits, a monotonicity the estimators rely on.
    """

    value: float
    uncertainty: float
    q: np.ndarray
    k_to_one: np.ndarray


def estimate_multiplier(orbit: Orbit) -> EstimateWithUncertainty:
    """Median of x_{n+1}/x_n over the tail; uncertainty is the max deviation."""
    n = len(orbit)
    if n < MIN_ORBIT_FOR_ESTIMATES:
        raise OrbitTooShortError(
            f"multiplier estimation needs >= {MIN_ORBIT_FOR_ESTIMATES} points, got {n}"
        )
    ratios = orbit.x[1:] / orbit.x[:-1]
    t0 = tail_start(ratios.size)
    window = ratios[t0:]
    med = float(np.median(window))
    unc = float(np.max(np.abs(window - med)))
    return EstimateWithUncertainty(value=med, uncertainty=unc)


def estimate_drift(orbit: Orbit) -> DriftEstimate:
    """Median of y_n/x_n over the tail, with the q_n diagnostics.

    Precondition: the orbit classifies as restricted (it always carries a
    finite witness at finite length; classification failures propagate).
    """
    n = len(orbit)
    if n < MIN_ORBIT_FOR_ESTIMATES:
        raise OrbitTooShortError(
            f"drift estimation needs >= {MIN_ORBIT_FOR_ESTIMATES} points, got {n}"
        )
    cls = classify_sequence(orbit.points)
    if not cls.restricted:
        raise DomainError("drift estimate requires a restricted orbit")
    ratios = orbit.y / orbit.x
    t0 = tail_start(ratios.size)
    window = ratios[t0:]
    med = float(np.median(window))
    unc = float(np.max(np.abs(window - med)))
    q = (orbit.x[1:] / orbit.x[:-1]) + 1j * (np.diff(orbit.y) / orbit.x[:-1])
    k_to_one = np.array([halfplane_distance(1.0 + 0j, complex(v)) for v in q])
    return DriftEstimate(value=med, uncertainty=unc, q=q, k_to_one=k_to_one)


def julia_margin(m: HoloMap, q: SiegelPoint) -> float:
    """siegel_height(phi(q)) - lam * siegel_height(q); nonnegative by Julia."""
    if m.domain != "siegel":
        raise DomainError("julia_margin is a Siegel-side quantity")
    if m.multiplier is None:
        raise DomainError("map carries no multiplier metadata")
    return siegel_height(m.evaluator(q)) - m.multiplier * siegel_height(q)


@dataclass(frozen=True)
class DynamicsSummary:
    multiplier: EstimateWithUncertainty
    drift: DriftEstimate
    classification: SequenceClassification
    q_final: complex


def summarize_orbit(orbit: Orbit) -> DynamicsSummary:
    """Bundle the classification and both estimates for reporting."""
    cls = classify_sequence(orbit.points)
    lam = estimate_multiplier(orbit)
    drift = estimate_drift(orbit)
    return DynamicsSummary(
        multiplier=lam,
        drift=drift,
        classification=cls,
        q_final=complex(drift.q[-1]),
    )
