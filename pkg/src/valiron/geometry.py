"""Invariant geometry of the unit ball and the Siegel upper half-space.

Two models of the same rank-one symmetric domain are supported:

* the unit ball ``B^N = {zeta in C^N : ||zeta|| < 1}``,
* the Siegel domain ``H^N = {(z, w) in C x C^(N-1) : Re z > ||w||^2}``,

linked by the Cayley transform.  The Hermitian product used throughout is
``<u, v> = sum_j u_j * conj(v_j)`` (second slot conjugated).

All values are plain data; nothing here mutates its inputs.  Strict domain
inequalities are enforced with a relative slack of ``BOUNDARY_SLACK``;
points inside the slack band are rejected, never clamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

# Tolerances are compile-time constants, read-only by convention.
BOUNDARY_SLACK = 1e-12      # relative slack on strict domain inequalities
MEMBERSHIP_BAND = 1e-9      # ambiguity band around region boundaries
UNIT_NORM_SLACK = 1e-12     # allowed deviation of boundary directions from norm 1


class DomainError(ValueError):
    """Input violates a domain invariant (outside, or inside the slack band)."""


class _InfinityVertex:
    """Tagged symbolic vertex at infinity; never a numeric sentinel."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = _InfinityVertex()


def _as_complex_vector(coords: Iterable[complex]) -> np.ndarray:
    arr = np.asarray(tuple(coords), dtype=np.complex128)
    if arr.ndim != 1:
        raise DomainError("coordinates must form a one-dimensional vector")
    return arr


def herm(u: np.ndarray, v: np.ndarray) -> complex:
    """Hermitian product <u, v> = sum u_j conj(v_j)."""
    return complex(np.dot(u, np.conjugate(v)))


def norm_sq(u: np.ndarray) -> float:
    return float(np.real(np.dot(u, np.conjugate(u))))


@dataclass(frozen=True)
class BallPoint:
    """Point of the open unit ball B^N.

    Rejects inputs with ``1 - ||coords||^2 <= BOUNDARY_SLACK``.
    """

    coords: np.ndarray

    def __init__(self, coords: Iterable[complex]):
        arr = _as_complex_vector(coords)
        if arr.size < 1:
            raise DomainError("ball point needs at least one coordinate")
        if 1.0 - norm_sq(arr) <= BOUNDARY_SLACK:
            raise DomainError(
                f"not strictly inside the unit ball: ||p||^2 = {norm_sq(arr)!r}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, BallPoint) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(tuple(self.coords.tolist()))


@dataclass(frozen=True)
class BoundaryDirection:
    """Unit vector marking a boundary point of B^N (norm 1 within 1e-12)."""

    coords: np.ndarray

    def __init__(self, coords: Iterable[complex]):
        arr = _as_complex_vector(coords)
        if abs(math.sqrt(norm_sq(arr)) - 1.0) > UNIT_NORM_SLACK:
            raise DomainError(f"boundary direction must have unit norm, got {math.sqrt(norm_sq(arr))!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, BoundaryDirection) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(tuple(self.coords.tolist()))


def e1_direction(n: int) -> BoundaryDirection:
    """Distinguished boundary direction (1, 0, ..., 0) in C^n."""
    v = np.zeros(n, dtype=np.complex128)
    v[0] = 1.0
    return BoundaryDirection(v)


@dataclass(frozen=True)
class SiegelPoint:
    """Point of the Siegel domain H^N: Re z > ||w||^2, strictly.

    ``z`` is the distinguished first coordinate, ``w`` the remaining N-1
    coordinates.  ``N = 1`` is allowed; ``w`` is then empty.
    """

    z: complex
    w: np.ndarray

    def __init__(self, z: complex, w: Iterable[complex] = ()):
        zc = complex(z)
        arr = _as_complex_vector(w)
        height = zc.real - norm_sq(arr)
        scale = max(1.0, abs(zc), norm_sq(arr))
        if height <= BOUNDARY_SLACK * scale:
            raise DomainError(
                f"not strictly inside the Siegel domain: Re z - ||w||^2 = {height!r}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "z", zc)
        object.__setattr__(self, "w", arr)

    @property
    def dim(self) -> int:
        return int(self.w.size) + 1

    @property
    def x(self) -> float:
        return self.z.real

    @property
    def y(self) -> float:
        return self.z.imag

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SiegelPoint)
            and self.z == other.z
            and np.array_equal(self.w, other.w)
        )

    def __hash__(self):
        return hash((self.z, tuple(self.w.tolist())))


def siegel_height(q: SiegelPoint) -> float:
    """Height Re z - ||w||^2; positive on the domain, 0 on the boundary."""
    return q.z.real - norm_sq(q.w)


def cayley_to_siegel(p: BallPoint) -> SiegelPoint:
    """Cayley transform B^N -> H^N.

    C(zeta_1, zeta') = ((1 + zeta_1)/(1 - zeta_1), zeta'/(1 - zeta_1)).
    The pole zeta_1 = 1 cannot occur for interior points but guards anyway.
    """
    zeta1 = complex(p.coords[0])
    denom = 1.0 - zeta1
    if abs(denom) <= BOUNDARY_SLACK:
        raise DomainError("Cayley transform undefined at zeta_1 = 1")
    z = (1.0 + zeta1) / denom
    w = p.coords[1:] / denom
    return SiegelPoint(z, w)


def cayley_to_ball(q: SiegelPoint) -> BallPoint:
    """Inverse Cayley transform H^N -> B^N.

    zeta_1 = (z - 1)/(z + 1), zeta' = 2 w/(z + 1).
    """
    denom = q.z + 1.0
    zeta1 = (q.z - 1.0) / denom
    zeta_rest = 2.0 * q.w / denom
    return BallPoint(np.concatenate(([zeta1], zeta_rest)))


def horoball_value(p: BallPoint, tau: BoundaryDirection) -> float:
    """Horoball level |1 - <p, tau>|^2 / (1 - ||p||^2) at tau.

    The horoball E(tau, t) is the sublevel set {value < 1/t}; smaller values
    mean deeper inside horoballs centered at tau.
    """
    if p.dim != tau.dim:
        raise DomainError("dimension mismatch between point and direction")
    num = abs(1.0 - herm(p.coords, tau.coords)) ** 2
    den = 1.0 - norm_sq(p.coords)
    return num / den


@dataclass(frozen=True)
class KoranyiRegion:
    """Approach region with a boundary vertex and an amplitude.

    Ball model: vertex tau in dB^N, amplitude R > 1/2, region
    ``|1 - <z, tau>| < R (1 - ||z||^2)``.  Siegel model: vertex INFINITY,
    amplitude M > 1, region ``||w||^2 < Re z - |z + 1| / M``.  Under the
    Cayley transform K(e_1, R) corresponds to K(INFINITY, 2R).
    """

    domain: str
    vertex: Union[BoundaryDirection, _InfinityVertex]
    amplitude: float

    def __post_init__(self):
        if self.domain == "ball":
            if not isinstance(self.vertex, BoundaryDirection):
                raise DomainError("ball region requires a BoundaryDirection vertex")
            if not self.amplitude > 0.5:
                raise DomainError("ball amplitude must satisfy R > 1/2")
        elif self.domain == "siegel":
            if self.vertex is not INFINITY:
                raise DomainError("siegel region vertex must be INFINITY")
            if not self.amplitude > 1.0:
                raise DomainError("siegel amplitude must satisfy M > 1")
        else:
            raise DomainError(f"unknown domain tag {self.domain!r}")


def koranyi_region_at_infinity(m_amplitude: float) -> KoranyiRegion:
    return KoranyiRegion("siegel", INFINITY, float(m_amplitude))


def koranyi_margin(region: KoranyiRegion, p: Union[BallPoint, SiegelPoint]) -> float:
    """Signed distance-like margin to the region boundary (positive inside)."""
    if region.domain == "ball":
        if not isinstance(p, BallPoint):
            raise DomainError("ball region expects a BallPoint")
        tau = region.vertex
        return region.amplitude * (1.0 - norm_sq(p.coords)) - abs(
            1.0 - herm(p.coords, tau.coords)
        )
    if not isinstance(p, SiegelPoint):
        raise DomainError("siegel region expects a SiegelPoint")
    return (p.z.real - abs(p.z + 1.0) / region.amplitude) - norm_sq(p.w)


def koranyi_classify(region: KoranyiRegion, p: Union[BallPoint, SiegelPoint]) -> str:
    """Three-valued membership: 'in', 'out', or 'band' near the boundary.

    The band is |margin| <= MEMBERSHIP_BAND relative to the point scale;
    callers that need a boolean must decide how to treat 'band' explicitly.
    """
    margin = koranyi_margin(region, p)
    if region.domain == "ball":
        scale = 1.0
    else:
        scale = max(1.0, abs(p.z))
    if abs(margin) <= MEMBERSHIP_BAND * scale:
        return "band"
    return "in" if margin > 0 else "out"


def koranyi_contains(region: KoranyiRegion, p: Union[BallPoint, SiegelPoint]) -> bool:
    """Boolean membership; band points count as outside (conservative)."""
    return koranyi_classify(region, p) == "in"


# -- Kobayashi distance ------------------------------------------------------


def mobius_involution(a: BallPoint) -> "_Mobius":
    """Ball automorphism phi_a with phi_a(0) = a, phi_a(a) = 0, involutive."""
    return _Mobius(a.coords.copy())


class _Mobius:
    """phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>), the standard involution.

    P_a is the orthogonal projection onto C a, Q_a = I - P_a and
    s_a = sqrt(1 - ||a||^2).
    """

    def __init__(self, a: np.ndarray):
        self.a = a
        self.a_sq = norm_sq(a)
        self.s = math.sqrt(max(0.0, 1.0 - self.a_sq))

    def apply(self, p: BallPoint) -> BallPoint:
        return BallPoint(self.apply_raw(p.coords))

    def apply_raw(self, z: np.ndarray) -> np.ndarray:
        if self.a_sq == 0.0:
            return -z
        za = herm(z, self.a)
        proj = (za / self.a_sq) * self.a
        perp = z - proj
        denom = 1.0 - za
        return (self.a - proj - self.s * perp) / denom


def kobayashi_distance(
    p: Union[BallPoint, SiegelPoint], q: Union[BallPoint, SiegelPoint]
) -> float:
    """Kobayashi distance, in either model.

    Ball pairs: move ``p`` to the origin with the Mobius involution, then
    ``tanh^-1`` of the image norm.  Siegel pairs use the Cayley transport
    of that formula,

        tanh^2 k(P, Q) = 1 - 4 h(P) h(Q) / |z_Q + conj(z_P) - 2<w_Q, w_P>|^2,

    which stays finite at heights where ball coordinates would round onto
    the sphere.  The one-point special cases ``k(0, z) = tanh^-1 ||z||``
    and ``k((z,0),(z,w)) = tanh^-1(||w|| / sqrt(Re z))`` fall out of these.
    """
    if isinstance(p, SiegelPoint) and isinstance(q, SiegelPoint):
        if p.dim != q.dim:
            raise DomainError("dimension mismatch")
        denom = abs(q.z + p.z.conjugate() - 2.0 * herm(q.w, p.w)) ** 2
        ratio = 4.0 * siegel_height(p) * siegel_height(q) / denom
        if ratio >= 1.0:
            return 0.0
        r = math.sqrt(1.0 - ratio)
        if r >= 1.0:
            return math.inf
        return math.atanh(r)
    if not (isinstance(p, BallPoint) and isinstance(q, BallPoint)):
        raise DomainError("kobayashi_distance expects two points of the same model")
    if p.dim != q.dim:
        raise DomainError("dimension mismatch")
    image = mobius_involution(p).apply_raw(q.coords)
    r = math.sqrt(norm_sq(image))
    if r >= 1.0:
        # only reachable through rounding on near-boundary pairs
        return math.inf
    return math.atanh(r)


# -- Automorphisms of the Siegel domain --------------------------------------


@dataclass(frozen=True)
class SiegelAutomorphism:
    """Automorphism of H^N fixing the vertex at infinity.

    kind 'scale-translate': (z, w) -> ((z - i y)/x, w/sqrt(x)) with x > 0.
    kind 'heisenberg-translate': (z, w) -> (z + ||a||^2 + 2 <w, a>, w + a).
    kind 'composite': ordered factors, applied first-to-last.
    """

    kind: str
    x: float = 1.0
    y: float = 0.0
    a: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128))
    factors: tuple = ()

    @staticmethod
    def scale(x: float, y: float = 0.0) -> "SiegelAutomorphism":
        if not x > 0.0:
            raise DomainError("scale-translate requires x > 0")
        return SiegelAutomorphism(kind="scale-translate", x=float(x), y=float(y))

    @staticmethod
    def translate(a: Iterable[complex]) -> "SiegelAutomorphism":
        arr = _as_complex_vector(a)
        arr.setflags(write=False)
        return SiegelAutomorphism(kind="heisenberg-translate", a=arr)

    @staticmethod
    def composite(factors: Sequence["SiegelAutomorphism"]) -> "SiegelAutomorphism":
        return SiegelAutomorphism(kind="composite", factors=tuple(factors))

    def inverse(self) -> "SiegelAutomorphism":
        if self.kind == "scale-translate":
            # ((z - iy)/x)^-1: z -> x z + i y
            return SiegelAutomorphism(kind="scale-translate", x=1.0 / self.x, y=-self.y / self.x)
        if self.kind == "heisenberg-translate":
            return SiegelAutomorphism.translate(-self.a)
        return SiegelAutomorphism.composite(tuple(f.inverse() for f in reversed(self.factors)))


def _apply_one(t: SiegelAutomorphism, z: complex, w: np.ndarray):
    if t.kind == "scale-translate":
        if not t.x > 0.0:
            raise DomainError("scale-translate requires x > 0")
        return (z - 1j * t.y) / t.x, w / math.sqrt(t.x)
    if t.kind == "heisenberg-translate":
        a = t.a
        if a.size != w.size:
            raise DomainError("translation vector dimension mismatch")
        return z + norm_sq(a) + 2.0 * herm(w, a), w + a
    if t.kind == "composite":
        for f in t.factors:
            z, w = _apply_one(f, z, w)
        return z, w
    raise DomainError(f"unknown automorphism kind {t.kind!r}")


def apply_automorphism(t: SiegelAutomorphism, q: SiegelPoint) -> SiegelPoint:
    """Apply t to q; the image is again a valid SiegelPoint by construction."""
    z, w = _apply_one(t, q.z, q.w)
    return SiegelPoint(z, w)


def apply_automorphism_inverse(t: SiegelAutomorphism, q: SiegelPoint) -> SiegelPoint:
    return apply_automorphism(t.inverse(), q)


# -- Linear projections onto parallel axes -----------------------------------


@dataclass(frozen=True)
class LinearProjectionAtInfinity:
    """Idempotent holomorphic projection onto the axis {(z, -a) : z in C}.

    rho_a(z, w) = (z + 2 ||a||^2 + 2 <w, a>, -a); a = 0 recovers the
    first-coordinate projection p_1(z, w) = (z, 0).  The left inverse
    rho~_a(z, w) = z + ||a||^2 + 2 <w, a> maps H^N into the half-plane.
    """

    a: np.ndarray

    def __init__(self, a: Iterable[complex]):
        arr = _as_complex_vector(a)
        arr.setflags(write=False)
        object.__setattr__(self, "a", arr)


def first_coordinate_projection(n_dim: int) -> LinearProjectionAtInfinity:
    return LinearProjectionAtInfinity(np.zeros(n_dim - 1, dtype=np.complex128))


def project(rho: LinearProjectionAtInfinity, q: SiegelPoint) -> SiegelPoint:
    """Apply rho_a; raises DomainError if the image leaves H^N.

    Mathematically the image of an interior point is interior; failures can
    only come from rounding near the boundary and must surface, not clamp.
    """
    a = rho.a
    if a.size != q.w.size:
        raise DomainError("projection vector dimension mismatch")
    z = q.z + 2.0 * norm_sq(a) + 2.0 * herm(q.w, a)
    try:
        return SiegelPoint(z, -a)
    except DomainError as exc:
        raise DomainError(f"projected image left the Siegel domain: {exc}") from exc


def left_inverse_value(rho: LinearProjectionAtInfinity, q: SiegelPoint) -> complex:
    """rho~_a(z, w) = z + ||a||^2 + 2 <w, a>, a point of the right half-plane."""
    a = rho.a
    if a.size != q.w.size:
        raise DomainError("projection vector dimension mismatch")
    return q.z + norm_sq(a) + 2.0 * herm(q.w, a)


def halfplane_distance(z1: complex, z2: complex) -> float:
    """Poincare distance on the right half-plane {Re z > 0}.

    tanh k = |z1 - z2| / |z1 + conj(z2)|; agrees with the N = 1 Siegel
    Kobayashi distance.
    """
    if z1.real <= 0 or z2.real <= 0:
        raise DomainError("half-plane distance needs Re z > 0")
    r = abs(z1 - z2) / abs(z1 + z2.conjugate())
    if r >= 1.0:
        return math.inf
    return math.atanh(r)
