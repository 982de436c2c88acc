"""Quadratic differentials built on symmetric divisors.

The differential attached to a divisor is Q(z) dz^2 with

    Q(z) = phase^2 * prod over finite points (z - p)^order,

order 2 at growth points and 2*sigma at marked points. The induced order at
infinity is -4 minus the sum of finite orders, so all orders sum to -4 on the
sphere. The unimodular phase is fixed by requiring a boundary arc of the
domain to be horizontal; horizontal trajectories of Q then follow the unit
line field u(z) with Q(z) u(z)^2 > 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from . import divisors
from .divisors import DISK, HALF_PLANE, SymmetricDivisor
from .errors import (
    DegenerateConfigurationError,
    InvalidReferenceError,
    SingularityProximityError,
    UnsupportedChargeError,
)

PROXIMITY_TOL = 1e-9
TWO_PI = 2.0 * math.pi

Factor = tuple[complex, int]


@dataclass(frozen=True)
class QuadDifferential:
    """Factorized form of Q(z) dz^2 on the half-plane or the disk.

    ``factors`` lists the finite (point, order) pairs, growth points first;
    a marked point at infinity has no factor (its order is induced).
    """

    domain: str
    factors: tuple[Factor, ...]
    n_growth: int
    phase: complex = 1.0 + 0j

    @property
    def infinity_order(self) -> int:
        return -4 - sum(order for _, order in self.factors)

    @property
    def growth_points(self) -> tuple[complex, ...]:
        return tuple(p for p, _ in self.factors[: self.n_growth])

    @property
    def marked_factors(self) -> tuple[Factor, ...]:
        return self.factors[self.n_growth :]

    def order_at(self, point: complex) -> int:
        for p, order in self.factors:
            if p == point:
                return order
        raise KeyError(f"{point} is not a singular point")

    def sqrt_log(self, z: complex) -> complex:
        """Principal-branch log of prod (z - p)^(order/2)."""
        total = 0j
        for p, order in self.factors:
            total += 0.5 * order * cmath.log(z - p)
        return total

    def eval_abs(self, z: complex) -> float:
        """|Q(z)|."""
        return math.exp(2.0 * self.sqrt_log(z).real)


def _field_angle(factors: Sequence[Factor], phase_arg: float, z: complex) -> float:
    """Angle of the horizontal direction at z, before sign resolution.

    The unit field is conj(phase * prod (z-p)^(order/2)) normalized, so its
    angle is -(arg(phase) + sum (order/2) arg(z - p)).
    """
    total = phase_arg
    for p, order in factors:
        d = z - p
        dr, di = d.real, d.imag
        if dr * dr + di * di < PROXIMITY_TOL * PROXIMITY_TOL:
            raise SingularityProximityError(
                f"field evaluation at {z} within {PROXIMITY_TOL:.0e} of {p}"
            )
        total += 0.5 * order * math.atan2(di, dr)
    return -total


def _boundary_arcs(domain: str, factors: Sequence[Factor]) -> list[tuple[complex, complex]]:
    """Reference (midpoint, unit tangent) of each boundary arc, in order.

    Arcs are delimited by the singular points sitting on the boundary. For
    the disk they are circular arcs listed counterclockwise from the smallest
    angle; for the half-plane the finite segments come first and the single
    unbounded arc through infinity is last.
    """
    if domain == DISK:
        angles = sorted(
            cmath.phase(p) % TWO_PI
            for p, _ in factors
            if abs(abs(p) - 1.0) <= divisors.BOUNDARY_TOL
        )
        if not angles:
            raise InvalidReferenceError("no singular points on the unit circle")
        arcs = []
        for i, a in enumerate(angles):
            b = angles[(i + 1) % len(angles)]
            gap = (b - a) % TWO_PI
            if gap == 0.0:
                gap = TWO_PI
            mid = cmath.exp(1j * (a + gap / 2.0))
            arcs.append((mid, 1j * mid))
        return arcs
    if domain == HALF_PLANE:
        xs = sorted(
            p.real for p, _ in factors if abs(p.imag) <= divisors.BOUNDARY_TOL
        )
        if not xs:
            raise InvalidReferenceError("no singular points on the real axis")
        arcs = [
            (complex((xs[i] + xs[i + 1]) / 2.0), 1.0 + 0j)
            for i in range(len(xs) - 1)
        ]
        arcs.append((complex(xs[-1] + 1.0), 1.0 + 0j))
        return arcs
    raise InvalidReferenceError(f"domain {domain!r} has no boundary arcs")


def normalize_phase(qd: QuadDifferential, reference_arc: int = 0) -> complex:
    """Unimodular correction c making the reference boundary arc horizontal.

    c satisfies (c * qd.phase)^2 * prod (z0-p)^order * tau(z0)^2 > 0 at the
    arc midpoint z0 with unit tangent tau. On a freshly assembled
    differential (phase 1) this is the absolute normalization constant;
    re-running on a normalized differential returns +-1.
    """
    arcs = _boundary_arcs(qd.domain, qd.factors)
    if not 0 <= reference_arc < len(arcs):
        raise InvalidReferenceError(
            f"reference arc {reference_arc} out of range (have {len(arcs)})"
        )
    z0, tau = arcs[reference_arc]
    for p, _ in qd.factors:
        if abs(z0 - p) <= PROXIMITY_TOL:
            raise InvalidReferenceError(f"arc midpoint {z0} is singular")
    arg_q = 2.0 * qd.sqrt_log(z0).imag + 2.0 * cmath.phase(qd.phase)
    arg_tau = cmath.phase(tau)
    c = cmath.exp(-0.5j * (arg_q + 2.0 * arg_tau))
    # canonical representative of the +-c pair
    if c.real < 0 or (c.real == 0 and c.imag < 0):
        c = -c
    return c


def build_Q(divisor: SymmetricDivisor, reference_arc: int = 0) -> QuadDifferential:
    """Assemble the differential of a valid divisor and fix its phase.

    Every charge must be a half-integer so the local exponents 2*sigma are
    integers.
    """
    report = divisors.validate(divisor)
    if not report.ok:
        raise DegenerateConfigurationError(f"invalid divisor: {report}")
    if divisor.domain not in (HALF_PLANE, DISK):
        raise InvalidReferenceError("differential requires a half-plane or disk divisor")
    factors: list[Factor] = [(p.value, 2) for p in divisor.growth]
    for q, s in divisor.marked:
        if s.non_half_integer:
            raise UnsupportedChargeError(
                f"charge {s} at {q} is not a half-integer"
            )
        order = 2 * s.exact
        if order.denominator != 1:
            raise UnsupportedChargeError(f"charge {s} at {q} is not a half-integer")
        if not q.finite or order == 0:
            continue
        factors.append((q.value, int(order)))
    qd = QuadDifferential(divisor.domain, tuple(factors), len(divisor.growth))
    return replace(qd, phase=normalize_phase(qd, reference_arc))


def direction_field(
    qd: QuadDifferential, z: complex, prev_dir: complex | None = None
) -> complex:
    """Unit vector of the horizontal line field at z.

    Of the two antipodal solutions of Q(z) u^2 > 0, returns the one with
    Re(u * conj(prev_dir)) >= 0 when prev_dir is given, else the one with
    argument in [0, pi).
    """
    angle = _field_angle(qd.factors, cmath.phase(qd.phase), z)
    u = complex(math.cos(angle), math.sin(angle))
    if prev_dir is not None:
        if u.real * prev_dir.real + u.imag * prev_dir.imag < 0:
            u = -u
    elif u.imag < 0 or (u.imag == 0 and u.real < 0):
        u = -u
    return u


@dataclass(frozen=True)
class SingularityInfo:
    """A finite singular point with its trajectory structure.

    For a zero of order n, ``angles`` are the n+2 separatrix directions; for
    a pole of order k >= 3 they are the k-2 distinguished approach
    directions; poles of order 1 and 2 have none.
    """

    point: complex
    order: int
    angles: tuple[float, ...]

    @property
    def kind(self) -> str:
        return "zero" if self.order > 0 else "pole"


def _local_coefficient_arg(qd: QuadDifferential, index: int) -> float:
    """arg of the leading coefficient of Q at the index-th factor point."""
    p, _ = qd.factors[index]
    total = 2.0 * cmath.phase(qd.phase)
    for k, (pk, order) in enumerate(qd.factors):
        if k == index:
            continue
        total += order * cmath.phase(p - pk)
    return total


def classify_singularities(qd: QuadDifferential) -> list[SingularityInfo]:
    """Singularity data for every finite factor point, angles sorted."""
    out = []
    for i, (p, order) in enumerate(qd.factors):
        arg_a = _local_coefficient_arg(qd, i)
        if order > 0:
            count = order + 2
            angles = [((TWO_PI * k - arg_a) / count) % TWO_PI for k in range(count)]
        elif order <= -3:
            count = -order - 2
            angles = [((arg_a + TWO_PI * k) / count) % TWO_PI for k in range(count)]
        else:
            angles = []
        out.append(SingularityInfo(p, order, tuple(sorted(angles))))
    return out


def pullback(qd: QuadDifferential, mapper: Callable[[complex], complex]) -> QuadDifferential:
    """Differential on the evolved configuration.

    ``mapper`` sends each original factor point to its evolved position
    (typically through a Loewner flow); orders are unchanged and the phase
    is re-derived from the first boundary arc.
    """
    factors = tuple((mapper(p), order) for p, order in qd.factors)
    for i in range(len(factors)):
        for j in range(i + 1, len(factors)):
            if abs(factors[i][0] - factors[j][0]) <= divisors.DISTINCT_TOL:
                raise DegenerateConfigurationError(
                    f"evolved factor points {factors[i][0]} and {factors[j][0]} coincide"
                )
    moved = QuadDifferential(qd.domain, factors, qd.n_growth)
    return replace(moved, phase=normalize_phase(moved))
