"""Holomorphic self-maps of the ball and Siegel domain, with a small catalog.

A map is a black-box evaluator plus metadata (Denjoy-Wolff point, boundary
multiplier, optional closed-form intertwining function).  The catalog holds
hyperbolic examples whose Schroder solutions are known, used as oracles:

* ``make_siegel_linear``      (z, w) -> (lam z, sqrt(lam) w)
* ``make_halfplane_affine``   (z, w) -> (lam z + i b, sqrt(lam) w)
* ``make_valiron_example``    (z, w) -> (A z + A w^2 psi(z), 0) on H^2

Evaluators are pure; per-point work is independent, so results never depend
on evaluation order.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .geometry import (
    BallPoint,
    BoundaryDirection,
    DomainError,
    INFINITY,
    SiegelPoint,
    cayley_to_ball,
    cayley_to_siegel,
    e1_direction,
    norm_sq,
    siegel_height,
)

# Hard ceiling for raw iteration; past this the renormalized pipeline is the
# only honest representation.
SCALE_LIMIT = 1e300

MULTIPLIER_CONSISTENCY = 1e-12


class ScaleOverflowError(OverflowError):
    """Raised when raw iteration exceeds SCALE_LIMIT.

    Orbit data past this point is not representable in doubles; use the
    renormalized pipeline (valiron.renorm) instead of raw iterate().
    """


@dataclass(frozen=True)
class PsiChoice:
    """Holomorphic psi: {Re z > 0} -> closed unit disk, |psi| < 1.

    kinds: 'constant' (param c, |c| < 1), 'cayley' (z -> (z-1)/(z+1)),
    'oscillating' (z -> exp(-pi/2) z^i, principal branch; bounded by 1 but
    with no limit along the positive real axis).
    """

    kind: str
    param: complex = 0.0

    def __post_init__(self):
        if self.kind == "constant":
            if abs(self.param) >= 1.0:
                raise DomainError("constant psi needs |param| < 1")
        elif self.kind not in ("cayley", "oscillating"):
            raise DomainError(f"unknown psi kind {self.kind!r}")

    def __call__(self, z: complex) -> complex:
        if self.kind == "constant":
            return complex(self.param)
        if self.kind == "cayley":
            return (z - 1.0) / (z + 1.0)
        # exp(-pi/2) * z^i = exp(-pi/2) * exp(i log z); |.| = exp(-arg z - pi/2)
        return cmath.exp(-math.pi / 2.0) * cmath.exp(1j * cmath.log(z))

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant({self.param:g})" if self.param.imag == 0 else f"constant({self.param})"
        return self.kind


Point = Union[BallPoint, SiegelPoint]


@dataclass(frozen=True)
class HoloMap:
    """Holomorphic self-map with hyperbolic boundary data.

    ``dw`` is the Denjoy-Wolff point: INFINITY for Siegel-side maps, a
    BoundaryDirection for ball-side ones.  ``multiplier`` is the boundary
    dilation coefficient: lam > 1 on the Siegel side, c = 1/lam < 1 on the
    ball side.  ``intertwiner``, when present, is a closed-form solution of
    the Schroder equation sigma(phi(q)) = lam sigma(q), used only as a test
    oracle.
    """

    domain: str
    dim: int
    evaluator: Callable[[Point], Point]
    dw: object
    multiplier: float
    intertwiner: Optional[Callable[[Point], complex]] = None
    name: str = "anonymous"
    params: dict = field(default_factory=dict)
    # the same map in the other model, when known; lets Cayley transports
    # round-trip exactly instead of stacking coordinate changes
    twin: Optional["HoloMap"] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.domain not in ("ball", "siegel"):
            raise DomainError(f"unknown domain tag {self.domain!r}")
        if self.domain == "siegel":
            if self.dw is not INFINITY:
                raise DomainError("siegel map must have Denjoy-Wolff point INFINITY")
            if not self.multiplier > 1.0:
                raise DomainError("siegel-side multiplier must satisfy lam > 1")
        else:
            if not isinstance(self.dw, BoundaryDirection):
                raise DomainError("ball map needs a BoundaryDirection Denjoy-Wolff point")
            if not 0.0 < self.multiplier < 1.0:
                raise DomainError("ball-side multiplier must satisfy 0 < c < 1")

    def __call__(self, q: Point) -> Point:
        return self.evaluator(q)


def multipliers_consistent(lam: float, c: float) -> bool:
    """Ball and Siegel multipliers describe the same map iff lam * c = 1."""
    return abs(lam * c - 1.0) <= MULTIPLIER_CONSISTENCY * max(1.0, lam)


def make_siegel_linear(lam: float, n_dim: int) -> HoloMap:
    """Hyperbolic linear model (z, w) -> (lam z, sqrt(lam) w); sigma = z."""
    if not lam > 1.0:
        raise DomainError("hyperbolicity requires lam > 1")
    root = math.sqrt(lam)

    def ev(q: SiegelPoint) -> SiegelPoint:
        return SiegelPoint(lam * q.z, root * q.w)

    return HoloMap(
        domain="siegel",
        dim=n_dim,
        evaluator=ev,
        dw=INFINITY,
        multiplier=float(lam),
        intertwiner=lambda q: q.z,
        name="siegel_linear",
        params={"lambda": float(lam), "N": int(n_dim)},
    )


def make_halfplane_affine(lam: float, b: float, n_dim: int) -> HoloMap:
    """Affine model (z, w) -> (lam z + i b, sqrt(lam) w); sigma = z + i L.

    The drift constant is L = b / (lam - 1), so that sigma(phi) = lam sigma.
    """
    if not lam > 1.0:
        raise DomainError("hyperbolicity requires lam > 1")
    root = math.sqrt(lam)
    drift = b / (lam - 1.0)

    def ev(q: SiegelPoint) -> SiegelPoint:
        return SiegelPoint(lam * q.z + 1j * b, root * q.w)

    return HoloMap(
        domain="siegel",
        dim=n_dim,
        evaluator=ev,
        dw=INFINITY,
        multiplier=float(lam),
        intertwiner=lambda q: q.z + 1j * drift,
        name="halfplane_affine",
        params={"lambda": float(lam), "b": float(b), "N": int(n_dim)},
    )


def make_valiron_example(a_mult: float, psi: PsiChoice) -> HoloMap:
    """Shear-type map of H^2: (z, w) -> (A z + A w^2 psi(z), 0), A > 1.

    Self-map because |w^2 psi(z)| < ||w||^2 < Re z; its Schroder solution is
    sigma(z, w) = z + w^2 psi(z), reached by the pipeline in very few steps
    since sigma_n stabilizes after one iteration.
    """
    if not a_mult > 1.0:
        raise DomainError("hyperbolicity requires A > 1")

    def ev(q: SiegelPoint) -> SiegelPoint:
        w1 = complex(q.w[0])
        return SiegelPoint(a_mult * q.z + a_mult * w1 * w1 * psi(q.z), np.zeros(1, dtype=np.complex128))

    def sigma(q: SiegelPoint) -> complex:
        w1 = complex(q.w[0])
        return q.z + w1 * w1 * psi(q.z)

    return HoloMap(
        domain="siegel",
        dim=2,
        evaluator=ev,
        dw=INFINITY,
        multiplier=float(a_mult),
        intertwiner=sigma,
        name="valiron_example",
        params={"A": float(a_mult), "psi": psi.describe()},
    )


def make_ball_map_from_siegel(m: HoloMap) -> HoloMap:
    """Conjugate a Siegel-side map by the Cayley transform onto the ball.

    Metadata is transported: the Denjoy-Wolff point INFINITY becomes e_1 and
    the multiplier becomes c = 1/lam.
    """
    if m.domain != "siegel":
        raise DomainError("expected a siegel-side map")
    if m.twin is not None and m.twin.domain == "ball":
        return m.twin

    def ev(p: BallPoint) -> BallPoint:
        return cayley_to_ball(m.evaluator(cayley_to_siegel(p)))

    theta = None
    if m.intertwiner is not None:
        theta = lambda p: m.intertwiner(cayley_to_siegel(p))  # noqa: E731

    return HoloMap(
        domain="ball",
        dim=m.dim,
        evaluator=ev,
        dw=e1_direction(m.dim),
        multiplier=1.0 / m.multiplier,
        intertwiner=theta,
        name=m.name + "_ball",
        params=dict(m.params),
        twin=m,
    )


def make_siegel_map_from_ball(m: HoloMap) -> HoloMap:
    """Inverse transport: conjugate a ball-side map onto the Siegel domain."""
    if m.domain != "ball":
        raise DomainError("expected a ball-side map")
    if m.twin is not None and m.twin.domain == "siegel":
        return m.twin

    def ev(q: SiegelPoint) -> SiegelPoint:
        return cayley_to_siegel(m.evaluator(cayley_to_ball(q)))

    sigma = None
    if m.intertwiner is not None:
        sigma = lambda q: m.intertwiner(cayley_to_ball(q))  # noqa: E731

    return HoloMap(
        domain="siegel",
        dim=m.dim,
        evaluator=ev,
        dw=INFINITY,
        multiplier=1.0 / m.multiplier,
        intertwiner=sigma,
        name=m.name.removesuffix("_ball"),
        params=dict(m.params),
        twin=m,
    )


def conjugate_map(m: HoloMap, t) -> HoloMap:
    """Conjugated map T o phi o T^-1 for an automorphism T fixing infinity."""
    from .geometry import apply_automorphism, apply_automorphism_inverse

    if m.domain != "siegel":
        raise DomainError("conjugation is implemented on the Siegel side")

    def ev(q: SiegelPoint) -> SiegelPoint:
        return apply_automorphism(t, m.evaluator(apply_automorphism_inverse(t, q)))

    return HoloMap(
        domain="siegel",
        dim=m.dim,
        evaluator=ev,
        dw=INFINITY,
        multiplier=m.multiplier,
        intertwiner=None,
        name=m.name + "_conj",
        params=dict(m.params),
    )


def _check_scale(q: Point) -> None:
    if isinstance(q, SiegelPoint) and q.z.real > SCALE_LIMIT:
        raise ScaleOverflowError(
            f"Re z = {q.z.real!r} exceeds {SCALE_LIMIT:g}; raw iteration cannot "
            "continue, use the renormalized pipeline"
        )


def iterate(m: HoloMap, q: Point, n: int) -> Point:
    """n-fold composition phi^n(q) by raw evaluation.

    Raises ScaleOverflowError once Re z exceeds SCALE_LIMIT; hyperbolic
    orbits grow like lam^n, so this triggers near n = log(1e300)/log(lam).
    """
    if n < 0:
        raise DomainError("iterate needs n >= 0")
    cur = q
    for _ in range(n):
        _check_scale(cur)
        cur = m.evaluator(cur)
        _check_scale(cur)
    return cur


# -- Deterministic stratified sampling ----------------------------------------

HEIGHT_STRATA = (0.1, 1.0, 10.0, 100.0)


def _rng_for(seed: int, index: int) -> np.random.Generator:
    # counter-based: each index owns an independent stream, so determinism
    # holds regardless of evaluation order
    return np.random.default_rng((int(seed), int(index)))


def sample_siegel_point(n_dim: int, seed: int, index: int) -> SiegelPoint:
    """Deterministic per-index sample, stratified across height scales.

    w is drawn uniformly from a polydisk of radius ~ sqrt(stratum), then
    Re z uniform in (||w||^2 + T, ||w||^2 + 10 T] and Im z uniform in
    [-10 T, 10 T] for stratum T.  Every stratum keeps the point at height
    at least T.
    """
    rng = _rng_for(seed, index)
    t_height = HEIGHT_STRATA[index % len(HEIGHT_STRATA)]
    radius = math.sqrt(t_height)
    if n_dim > 1:
        mods = rng.uniform(0.0, radius, size=n_dim - 1)
        phases = rng.uniform(0.0, 2.0 * math.pi, size=n_dim - 1)
        w = mods * np.exp(1j * phases)
    else:
        w = np.zeros(0, dtype=np.complex128)
    wsq = norm_sq(w)
    x = wsq + rng.uniform(t_height, 10.0 * t_height)
    y = rng.uniform(-10.0 * t_height, 10.0 * t_height)
    return SiegelPoint(complex(x, y), w)


def sample_ball_point(n_dim: int, seed: int, index: int) -> BallPoint:
    """Deterministic ball sample: Cayley image of a Siegel sample."""
    return cayley_to_ball(sample_siegel_point(n_dim, seed, index))


@dataclass(frozen=True)
class ValidationReport:
    samples: int
    violations: tuple
    worst_julia_margin: Optional[float]
    passed: bool


def validate_self_map(m: HoloMap, samples: int = 400, seed: int = 0) -> ValidationReport:
    """Empirically check the self-map property and the Julia inequality.

    Points are drawn deterministically from the stratified sampler; each
    image must lie in the domain, and when a multiplier is claimed the
    Julia margin must be nonnegative (up to rounding slack).  Returns the
    worst observed margin, normalized by the input height.
    """
    violations = []
    worst = None
    for i in range(samples):
        if m.domain == "siegel":
            q = sample_siegel_point(m.dim, seed, i)
        else:
            q = sample_ball_point(m.dim, seed, i)
        try:
            image = m.evaluator(q)
        except DomainError as exc:
            violations.append((i, q, None, f"image rejected: {exc}"))
            continue
        if m.domain == "siegel":
            h_in = siegel_height(q)
            h_out = siegel_height(image)
            margin = (h_out - m.multiplier * h_in) / h_in
        else:
            from .geometry import horoball_value

            v_in = horoball_value(q, m.dw)
            v_out = horoball_value(image, m.dw)
            # Julia: value(phi(p)) <= c * value(p)
            margin = (m.multiplier * v_in - v_out) / v_in
        worst = margin if worst is None else min(worst, margin)
        if margin < -MULTIPLIER_CONSISTENCY * 1e3:  # 1e-9 relative slack
            violations.append((i, q, image, f"julia margin {margin!r}"))
    return ValidationReport(
        samples=samples,
        violations=tuple(violations),
        worst_julia_margin=worst,
        passed=not violations,
    )


# -- Catalog -------------------------------------------------------------------


def catalog() -> dict:
    """Canonical named instances used by tests and the CLI."""
    return {
        "siegel_linear(2,2)": make_siegel_linear(2.0, 2),
        "siegel_linear(1.5,1)": make_siegel_linear(1.5, 1),
        "siegel_linear(3,3)": make_siegel_linear(3.0, 3),
        "halfplane_affine(2,1,2)": make_halfplane_affine(2.0, 1.0, 2),
        "halfplane_affine(3,5,2)": make_halfplane_affine(3.0, 5.0, 2),
        "valiron_example(2,constant(0.5))": make_valiron_example(
            2.0, PsiChoice("constant", 0.5)
        ),
        "valiron_example(2,oscillating)": make_valiron_example(
            2.0, PsiChoice("oscillating")
        ),
        "valiron_example(3,cayley)": make_valiron_example(3.0, PsiChoice("cayley")),
    }
