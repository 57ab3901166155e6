"""Renormalized iteration solving the Schroder equation at a boundary fixed point.

For a hyperbolic self-map phi of H^N with Denjoy-Wolff point at infinity and
multiplier lam > 1, the normalized first coordinates

    sigma_n(Z) = pi_1(phi^n(Z)) / x_n,   x_n = Re pi_1(phi^n(base)),

converge to a solution of sigma o phi = lam sigma.  Directly iterating phi
overflows once x_n passes ~1e300; this module instead advances the
renormalized state

    S_n(Z) = (pi_1(phi^n(Z)) / x_n,  pi_w(phi^n(Z)) / sqrt(x_n))

one step at a time via S_{n+1} = (L_{n+1} o phi o L_n^{-1})(S_n), which keeps
every stored quantity O(1); the base scale itself is stored in log-space.
The update is algebraically identical to direct iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import (
    Orbit,
    SequenceClassification,
    classify_sequence,
    compute_orbit,
    estimate_drift,
    estimate_multiplier,
    tail_start,
)
from .geometry import (
    BallPoint,
    DomainError,
    SiegelAutomorphism,
    SiegelPoint,
    apply_automorphism,
    apply_automorphism_inverse,
    cayley_to_ball,
    cayley_to_siegel,
    norm_sq,
)
from .maps import HoloMap, ScaleOverflowError, conjugate_map, make_siegel_map_from_ball

MIN_GRID_HEIGHT = 0.1
HYPERBOLICITY_MARGIN = 1e-6
CONSECUTIVE_CAUCHY = 3
PROBE_MIN_STEPS = 32
PROBE_MAX_STEPS = 64
PROBE_TARGET_HEIGHT = 1e8
# ln of the largest base scale at which states can still be de-normalized
LOG_SCALE_CEILING = math.log(1e300)


class DegenerateGridError(ValueError):
    """Evaluation grid is empty or collapses to a single point."""


class NonHyperbolicError(ValueError):
    """Estimated multiplier is not bounded away from 1."""


@dataclass(frozen=True)
class EvaluationGrid:
    """Finite set of probe points, all at height >= MIN_GRID_HEIGHT."""

    points: tuple

    def __init__(self, points: Sequence[SiegelPoint]):
        pts = tuple(points)
        if not pts:
            raise DegenerateGridError("empty evaluation grid")
        if len({(p.z, tuple(p.w.tolist())) for p in pts}) < 2:
            raise DegenerateGridError("grid must contain at least 2 distinct points")
        for p in pts:
            if p.z.real - norm_sq(p.w) < MIN_GRID_HEIGHT:
                raise DegenerateGridError(
                    f"grid point at height {p.z.real - norm_sq(p.w)!r} < {MIN_GRID_HEIGHT}"
                )
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


def default_grid(n_dim: int) -> EvaluationGrid:
    """Tensor grid: z in {1,2,4} x {0, +i/2, -i/2}, small w polydisk.

    w magnitudes are capped at 0.5 so every point sits at height >= 0.75.
    """
    z_values = [zb + d for zb in (1.0, 2.0, 4.0) for d in (0.0, 0.5j, -0.5j)]
    if n_dim == 1:
        w_values = [np.zeros(0, dtype=np.complex128)]
    else:
        e1 = np.zeros(n_dim - 1, dtype=np.complex128)
        e1[0] = 1.0
        diag = np.ones(n_dim - 1, dtype=np.complex128) / math.sqrt(n_dim - 1)
        w_values = [0.0 * e1, 0.5 * e1, 0.5j * e1, 0.25 * diag]
    return EvaluationGrid(
        [SiegelPoint(z, w) for z in z_values for w in w_values]
    )


@dataclass(frozen=True)
class RenormalizedState:
    """State of the pipeline after n steps.

    ``sigma``/``v`` hold S_n at the grid points, ``sigma_img``/``v_img`` hold
    S_n at the phi-images of the grid (so sigma_n(phi(Z)) is always on hand),
    and ``base_sigma``/``base_v`` track the normalizing orbit.  ``log_x`` is
    the base scale in log-space; ``ratios`` records x_{k+1}/x_k.
    """

    n: int
    log_x: float
    sigma: np.ndarray
    v: np.ndarray
    sigma_img: np.ndarray
    v_img: np.ndarray
    base_sigma: complex
    base_v: np.ndarray
    ratios: tuple = ()

    @property
    def x(self) -> float:
        return math.exp(self.log_x)

    def magnitude(self) -> float:
        """Largest stored component magnitude (boundedness diagnostic)."""
        parts = [np.max(np.abs(self.sigma)), np.max(np.abs(self.sigma_img)), abs(self.base_sigma)]
        for arr in (self.v, self.v_img, self.base_v):
            if arr.size:
                parts.append(np.max(np.abs(arr)))
        return float(max(parts))


def initial_state(m: HoloMap, grid: EvaluationGrid, base: SiegelPoint) -> RenormalizedState:
    x0 = base.z.real
    pts = grid.points
    imgs = [m.evaluator(p) for p in pts]
    root = math.sqrt(x0)

    def pack(points):
        sig = np.array([p.z / x0 for p in points], dtype=np.complex128)
        if points[0].w.size:
            vv = np.array([p.w / root for p in points], dtype=np.complex128)
        else:
            vv = np.zeros((len(points), 0), dtype=np.complex128)
        return sig, vv

    sigma, v = pack(pts)
    sigma_img, v_img = pack(imgs)
    return RenormalizedState(
        n=0,
        log_x=math.log(x0),
        sigma=sigma,
        v=v,
        sigma_img=sigma_img,
        v_img=v_img,
        base_sigma=base.z / x0,
        base_v=base.w / root,
    )


def _advance_group(m: HoloMap, sigma, v, x_n, x_next, root_n, root_next):
    new_sigma = np.empty_like(sigma)
    new_v = np.empty_like(v)
    for j in range(sigma.size):
        big = SiegelPoint(x_n * sigma[j], root_n * v[j])
        image = m.evaluator(big)
        new_sigma[j] = image.z / x_next
        new_v[j] = image.w / root_next
    return new_sigma, new_v


def advance(state: RenormalizedState, m: HoloMap) -> RenormalizedState:
    """One renormalized step: S_{n+1} = (L_{n+1} o phi o L_n^{-1}) o S_n.

    De-normalizing for the black-box evaluation needs x_n as a float, so a
    scale ceiling still exists; it is checked up-front and raised loudly
    instead of silently producing infinities.
    """
    max_mag = state.magnitude()
    if state.log_x + math.log(max(1.0, max_mag)) > LOG_SCALE_CEILING:
        raise ScaleOverflowError(
            "de-normalized evaluation would exceed the double-precision range"
        )
    x_n = state.x
    root_n = math.sqrt(x_n)

    base_big = SiegelPoint(x_n * state.base_sigma, root_n * state.base_v)
    base_image = m.evaluator(base_big)
    x_next = base_image.z.real
    ratio = x_next / x_n
    if not ratio > 0.0:
        raise DomainError("base orbit left the Siegel domain")
    root_next = math.sqrt(x_next)

    sigma, v = _advance_group(m, state.sigma, state.v, x_n, x_next, root_n, root_next)
    sigma_img, v_img = _advance_group(
        m, state.sigma_img, state.v_img, x_n, x_next, root_n, root_next
    )
    return RenormalizedState(
        n=state.n + 1,
        log_x=state.log_x + math.log(ratio),
        sigma=sigma,
        v=v,
        sigma_img=sigma_img,
        v_img=v_img,
        base_sigma=base_image.z / x_next,
        base_v=base_image.w / root_next,
        ratios=state.ratios + (ratio,),
    )


def intertwining_identity_check(state: RenormalizedState, m: HoloMap) -> float:
    """Max relative deviation of sigma_n(phi(Z)) = (x_{n+1}/x_n) sigma_{n+1}(Z).

    The identity is algebraic, so the deviation measures only rounding; a
    mis-cached scale breaks it immediately, which is what this guards.
    """
    nxt = advance(state, m)
    ratio = nxt.ratios[-1]
    lhs = state.sigma_img
    rhs = ratio * nxt.sigma
    scale = np.maximum(1.0, np.abs(rhs))
    return float(np.max(np.abs(lhs - rhs) / scale))


@dataclass(frozen=True)
class ValironResult:
    """Converged (or truncated) output of the renormalization pipeline."""

    map: HoloMap
    grid: EvaluationGrid
    base: SiegelPoint
    multiplier: float
    multiplier_uncertainty: float
    drift: float
    drift_uncertainty: float
    sigma: np.ndarray
    sigma_image: np.ndarray
    schroder_residuals: np.ndarray
    converged: bool
    n_stop: int
    cauchy_history: tuple
    normalization: complex
    classification: SequenceClassification
    outside_hypotheses: bool
    warnings: tuple
    base_orbit: Orbit
    trace: tuple = ()
    _sigma_fn: Optional[Callable] = field(default=None, repr=False, compare=False)

    def sigma_at(self, points: Sequence[SiegelPoint]) -> np.ndarray:
        """Evaluate the converged sigma at arbitrary points.

        Re-runs the renormalized recursion for n_stop steps with the given
        points riding along the same base orbit, so off-grid probes use
        exactly the pipeline that produced the grid samples.
        """
        points = list(points)
        if not points:
            return np.zeros(0, dtype=np.complex128)
        if self._sigma_fn is not None:
            return self._sigma_fn(points)
        x0 = self.base.z.real
        root0 = math.sqrt(x0)
        sigma = np.array([p.z / x0 for p in points], dtype=np.complex128)
        if points[0].w.size:
            v = np.array([p.w / root0 for p in points], dtype=np.complex128)
        else:
            v = np.zeros((len(points), 0), dtype=np.complex128)
        base_sigma = self.base.z / x0
        base_v = self.base.w / root0
        log_x = math.log(x0)
        for _ in range(self.n_stop):
            x_n = math.exp(log_x)
            root_n = math.sqrt(x_n)
            base_image = self.map.evaluator(SiegelPoint(x_n * base_sigma, root_n * base_v))
            x_next = base_image.z.real
            root_next = math.sqrt(x_next)
            sigma, v = _advance_group(self.map, sigma, v, x_n, x_next, root_n, root_next)
            base_sigma = base_image.z / x_next
            base_v = base_image.w / root_next
            log_x += math.log(x_next / x_n)
        return sigma

    def residual_at(self, points: Sequence[SiegelPoint]) -> np.ndarray:
        """Schroder residual |sigma(phi q) - lam sigma(q)| / (1 + |sigma(q)|)."""
        points = list(points)
        images = [self.map.evaluator(p) for p in points]
        s = self.sigma_at(points)
        s_img = self.sigma_at(images)
        return np.abs(s_img - self.multiplier * s) / (1.0 + np.abs(s))


def schroder_residual(m: HoloMap, sigma: Callable[[SiegelPoint], complex], q: SiegelPoint,
                      lam: Optional[float] = None) -> float:
    """Normalized defect of the Schroder equation at one point."""
    if lam is None:
        lam = m.multiplier
    sq = complex(sigma(q))
    s_img = complex(sigma(m.evaluator(q)))
    return abs(s_img - lam * sq) / (1.0 + abs(sq))


def _multiplier_excess_decays(probe: Orbit) -> bool:
    """Detect a multiplier limit of 1 from the ratio trend.

    Hyperbolic orbits have x_{n+1}/x_n - lam shrinking geometrically, so the
    tail excess over 1 stabilizes (half-median ratio ~ 1); linear parabolic
    growth has excess ~ 1/x_n, giving a half-median ratio near 1/sqrt(2),
    and no fixed threshold below the excess itself would be honest.  Flags
    when the late-tail excess dropped under 85% of the early-tail excess
    while the apparent multiplier is already close to 1.
    """
    ratios = probe.x[1:] / probe.x[:-1]
    tail = ratios[tail_start(ratios.size):]
    half = tail.size // 2
    if half < 4:
        return False
    early = float(np.median(tail[:half])) - 1.0
    late = float(np.median(tail[half:])) - 1.0
    return late < 0.1 and late <= 0.85 * early


def run_valiron(
    m: HoloMap,
    grid: Optional[EvaluationGrid] = None,
    base: Optional[SiegelPoint] = None,
    tol: float = 1e-8,
    n_max: int = 200,
    record_trace: bool = False,
) -> ValironResult:
    """Run the renormalization pipeline to convergence.

    Stops once the sup-grid Cauchy increment |sigma_{n+1} - sigma_n| stays
    below ``tol`` for CONSECUTIVE_CAUCHY consecutive steps, else at
    ``n_max`` with ``converged = False``.  A base orbit that is only
    C-special (not special) is outside the construction's hypotheses; the
    run proceeds but the result is flagged.

    Raises NotTendingToInfinityError, DegenerateGridError, or
    NonHyperbolicError when the inputs do not describe a hyperbolic
    approach to infinity.
    """
    if m.domain == "ball":
        m = make_siegel_map_from_ball(m)
    if grid is None:
        grid = default_grid(m.dim)
    if base is None:
        base = SiegelPoint(1.0, np.zeros(m.dim - 1, dtype=np.complex128))

    warnings: list = []

    # probe adaptively: enough growth to classify and estimate, but not so
    # far that maps wrapped in coordinate changes lose boundary precision
    probe = compute_orbit(m, base, PROBE_MIN_STEPS)
    if probe.cutoff is None and probe.x[-1] < PROBE_TARGET_HEIGHT:
        probe = compute_orbit(m, base, PROBE_MAX_STEPS)
    classification = classify_sequence(probe.points)
    lam = estimate_multiplier(probe)
    if lam.value <= 1.0 + HYPERBOLICITY_MARGIN or _multiplier_excess_decays(probe):
        raise NonHyperbolicError(
            f"multiplier estimate {lam.value!r} not bounded away from 1"
        )
    drift = estimate_drift(probe)
    outside = not classification.special
    if outside:
        warnings.append(
            "outside-hypotheses: base orbit is only C-special "
            f"(residual witness {classification.a_witness:.3g}); proceeding"
        )

    state = initial_state(m, grid, base)
    trace = [state] if record_trace else []
    cauchy: list = []
    consecutive = 0
    converged = False
    for _ in range(n_max):
        try:
            nxt = advance(state, m)
        except ScaleOverflowError:
            warnings.append(
                f"scale ceiling reached at step {state.n}; stopping before n_max"
            )
            break
        step = float(np.max(np.abs(nxt.sigma - state.sigma)))
        cauchy.append(step)
        state = nxt
        if record_trace:
            trace.append(state)
        if step < tol:
            consecutive += 1
            if consecutive >= CONSECUTIVE_CAUCHY:
                converged = True
                break
        else:
            consecutive = 0

    residuals = np.abs(state.sigma_img - lam.value * state.sigma) / (1.0 + np.abs(state.sigma))
    return ValironResult(
        map=m,
        grid=grid,
        base=base,
        multiplier=lam.value,
        multiplier_uncertainty=lam.uncertainty,
        drift=drift.value,
        drift_uncertainty=drift.uncertainty,
        sigma=state.sigma.copy(),
        sigma_image=state.sigma_img.copy(),
        schroder_residuals=residuals,
        converged=converged,
        n_stop=state.n,
        cauchy_history=tuple(cauchy),
        normalization=complex(state.base_sigma),
        classification=classification,
        outside_hypotheses=outside,
        warnings=tuple(warnings),
        base_orbit=probe,
        trace=tuple(trace),
    )


def conjugation_transport(result: ValironResult, t: SiegelAutomorphism) -> ValironResult:
    """Transport a converged result to the conjugated map T o phi o T^-1.

    With Z_0 = T^-1(1, 0), the transported solution is

        sigma~(W) = sigma(T^-1 W) / Re sigma(Z_0),

    normalized so that Re sigma~(1, 0) = 1; the multiplier is unchanged.
    The grid is moved to T(grid) and the samples rescaled accordingly.
    """
    one = SiegelPoint(1.0, np.zeros(result.map.dim - 1, dtype=np.complex128))
    if result.base != one:
        raise DomainError("transport is normalized at base (1, 0)")
    z0 = apply_automorphism_inverse(t, one)
    sigma_z0 = complex(result.sigma_at([z0])[0])
    if not sigma_z0.real > 0.0:
        raise DomainError("transport normalizer must have positive real part")
    factor = 1.0 / sigma_z0.real

    moved_grid = EvaluationGrid([apply_automorphism(t, p) for p in result.grid.points])
    sigma = factor * result.sigma
    # phi_c(T Z) = T(phi Z), so the image samples transport by the same factor
    sigma_image = factor * result.sigma_image
    residuals = np.abs(sigma_image - result.multiplier * sigma) / (1.0 + np.abs(sigma))

    inner = result  # closure over the original pipeline

    def transported_sigma(points):
        pre = [apply_automorphism_inverse(t, p) for p in points]
        return factor * inner.sigma_at(pre)

    drift = sigma_z0.imag / sigma_z0.real
    return replace(
        result,
        map=conjugate_map(result.map, t),
        grid=moved_grid,
        sigma=sigma,
        sigma_image=sigma_image,
        schroder_residuals=residuals,
        drift=drift,
        normalization=complex(1.0, drift),
        warnings=result.warnings + ("transported by conjugation",),
        _sigma_fn=transported_sigma,
    )


@dataclass(frozen=True)
class BallSideTheta:
    """Ball-side solution Theta = sigma o C of Theta o phi = (1/c) Theta."""

    result: ValironResult
    ball_points: tuple
    theta: np.ndarray
    residuals: np.ndarray

    def theta_at(self, points: Sequence[BallPoint]) -> np.ndarray:
        return self.result.sigma_at([cayley_to_siegel(p) for p in points])


def ball_side_theta(result: ValironResult) -> BallSideTheta:
    """Wrap a converged Siegel-side result as a ball-side intertwiner.

    Theta(0) equals the normalization 1 + i L (origin maps to the base
    point), Re Theta > 0 everywhere, and the residual against multiplier
    1/c = lam is the transported Schroder defect.
    """
    if not result.converged:
        raise DomainError("ball-side wrapper needs a converged result")
    ball_points = tuple(cayley_to_ball(p) for p in result.grid.points)
    return BallSideTheta(
        result=result,
        ball_points=ball_points,
        theta=result.sigma.copy(),
        residuals=result.schroder_residuals.copy(),
    )
