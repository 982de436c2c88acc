"""Symmetric divisors on the Riemann sphere and their Coulomb-gas correlations.

A divisor here is a finite set of weighted points: growth points carrying
charge +1 (where curves start) and marked points carrying real charges,
typically half-integers. Admissible divisors are closed under the reflection
symmetry of their domain (complex conjugation for the half-plane, circle
inversion for the disk) and satisfy the neutrality condition

    (number of growth points) + sum of marked charges = -2,

counting an explicit charge at infinity if present.

The absolute value of the pairwise-product correlation and of the partition
function are computed in log space; phases of the multivalued products are
never materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DegenerateConfigurationError

DISTINCT_TOL = 1e-12
BOUNDARY_TOL = 1e-9
SYMMETRY_TOL = 1e-10
NEUTRALITY_TOL = 1e-10
IMAG_RESIDUE_TOL = 1e-10

HALF_PLANE = "half_plane"
DISK = "disk"
SPHERE = "sphere"


@dataclass(frozen=True)
class SpherePoint:
    """A point of the Riemann sphere: a finite complex value or infinity."""

    value: complex = 0j
    is_infinity: bool = False

    @classmethod
    def of(cls, z: Union["SpherePoint", complex, float, str]) -> "SpherePoint":
        if isinstance(z, SpherePoint):
            return z
        if isinstance(z, str):
            return parse_point(z)
        return cls(complex(z))

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(0j, True)

    @property
    def finite(self) -> bool:
        return not self.is_infinity

    def __str__(self) -> str:
        return "inf" if self.is_infinity else format_complex(self.value)


INFINITY = SpherePoint.infinity()


@dataclass(frozen=True)
class Charge:
    """A real charge, canonically a half-integer p/1 or p/2.

    Non-half-integer charges are carried through ``real_value`` and flagged;
    they are accepted by the Loewner integrator but not by the quadratic
    differential (whose local exponents 2*sigma must be integers).
    """

    numerator: int = 0
    denominator: int = 1
    real_value: float | None = None

    def __post_init__(self) -> None:
        if self.real_value is None and self.denominator not in (1, 2):
            raise ValueError("charge denominator must be 1 or 2")

    @classmethod
    def of(cls, x: Union["Charge", int, float, str, Fraction]) -> "Charge":
        if isinstance(x, Charge):
            return x
        if isinstance(x, int):
            return cls(x, 1)
        if isinstance(x, (str, Fraction)):
            frac = Fraction(x)
        else:
            frac = Fraction(x).limit_denominator(10**9)
            if not math.isclose(float(frac), float(x), rel_tol=0, abs_tol=1e-15):
                return cls(0, 1, float(x))
        if frac.denominator in (1, 2):
            return cls(frac.numerator, frac.denominator)
        return cls(0, 1, float(frac))

    @property
    def non_half_integer(self) -> bool:
        return self.real_value is not None

    @property
    def value(self) -> float:
        if self.real_value is not None:
            return self.real_value
        return self.numerator / self.denominator

    @property
    def exact(self) -> Fraction | None:
        if self.real_value is not None:
            return None
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        if self.real_value is not None:
            return repr(self.real_value)
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"


def conformal_dimension(sigma: Union[Charge, float]) -> float:
    """Scaling dimension sigma^2 + 2*sigma of a charge (symmetric about -1)."""
    s = float(sigma)
    return s * s + 2.0 * s


MarkedPoint = tuple[SpherePoint, Charge]


@dataclass(frozen=True)
class SymmetricDivisor:
    """Growth points (charge +1) plus marked charged points on a domain.

    ``domain`` is ``half_plane`` or ``disk`` for structured divisors; images
    under general Moebius maps are tagged ``sphere`` and keep only the
    domain-free invariants (distinctness, neutrality).
    """

    domain: str
    growth: tuple[SpherePoint, ...]
    marked: tuple[MarkedPoint, ...]

    @classmethod
    def build(cls, domain: str, growth: Iterable, marked: Iterable) -> "SymmetricDivisor":
        g = tuple(SpherePoint.of(p) for p in growth)
        m = tuple((SpherePoint.of(p), Charge.of(s)) for p, s in marked)
        return cls(domain, g, m)

    @classmethod
    def half_plane(cls, growth: Iterable, marked: Iterable) -> "SymmetricDivisor":
        return cls.build(HALF_PLANE, growth, marked)

    @classmethod
    def disk(cls, growth: Iterable, marked: Iterable) -> "SymmetricDivisor":
        return cls.build(DISK, growth, marked)

    def weighted_points(self) -> list[tuple[SpherePoint, float]]:
        """All divisor points with their charges, growth first."""
        pts = [(p, 1.0) for p in self.growth]
        pts.extend((q, float(s)) for q, s in self.marked)
        return pts

    def finite_weighted(self) -> list[tuple[complex, float]]:
        return [(p.value, s) for p, s in self.weighted_points() if p.finite]

    def charge_sum(self) -> float:
        return len(self.growth) + math.fsum(float(s) for _, s in self.marked)

    def charge_sum_exact(self) -> Fraction | None:
        """Exact total charge, or None if any charge is a raw real."""
        total = Fraction(len(self.growth))
        for _, s in self.marked:
            if s.exact is None:
                return None
            total += s.exact
        return total


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems

    def __str__(self) -> str:
        return "ok" if self.ok else "\n".join(self.problems)


def _reflect(domain: str, p: SpherePoint) -> SpherePoint:
    """Boundary reflection pairing a point with its symmetry partner."""
    if domain == HALF_PLANE:
        if p.is_infinity:
            return p
        return SpherePoint(p.value.conjugate())
    if p.is_infinity:
        return SpherePoint(0j)
    if p.value == 0:
        return INFINITY
    return SpherePoint(1.0 / p.value.conjugate())


def _points_close(a: SpherePoint, b: SpherePoint, tol: float) -> bool:
    if a.is_infinity or b.is_infinity:
        return a.is_infinity and b.is_infinity
    return abs(a.value - b.value) <= tol


def validate(divisor: SymmetricDivisor) -> ValidationReport:
    """Check admissibility; the report lists every violated invariant."""
    problems: list[str] = []
    if divisor.domain not in (HALF_PLANE, DISK, SPHERE):
        problems.append(f"unknown domain {divisor.domain!r}")

    if not divisor.growth:
        problems.append("no growth points")

    structured = divisor.domain in (HALF_PLANE, DISK)
    if structured:
        for p in divisor.growth:
            if p.is_infinity:
                problems.append("growth point at infinity")
            elif divisor.domain == HALF_PLANE and abs(p.value.imag) > BOUNDARY_TOL:
                problems.append(f"growth point {p} not on the real axis")
            elif divisor.domain == DISK and abs(abs(p.value) - 1.0) > BOUNDARY_TOL:
                problems.append(f"growth point {p} not on the unit circle")

    pts = [p for p, _ in divisor.weighted_points()]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if _points_close(pts[i], pts[j], DISTINCT_TOL):
                problems.append(f"points {pts[i]} and {pts[j]} coincide")

    if structured:
        # Marked multiset must be closed under the domain reflection, with
        # matching charges; growth points must be fixed by it (they sit on
        # the boundary, checked above).
        unmatched = list(range(len(divisor.marked)))
        while unmatched:
            i = unmatched.pop(0)
            q, s = divisor.marked[i]
            mirror = _reflect(divisor.domain, q)
            if _points_close(q, mirror, SYMMETRY_TOL):
                continue
            partner = None
            for j in unmatched:
                qj, sj = divisor.marked[j]
                if _points_close(qj, mirror, SYMMETRY_TOL) and abs(float(sj) - float(s)) <= SYMMETRY_TOL:
                    partner = j
                    break
            if partner is None:
                problems.append(f"marked point {q} (charge {s}) has no symmetry partner")
            else:
                unmatched.remove(partner)

    exact_sum = divisor.charge_sum_exact()
    if exact_sum is not None:
        if exact_sum != -2:
            problems.append(f"total charge {exact_sum} != -2")
    elif abs(divisor.charge_sum() + 2.0) > NEUTRALITY_TOL:
        problems.append(f"total charge {divisor.charge_sum()!r} != -2")

    return ValidationReport(tuple(problems))


def _log_abs_pair_products(points: Sequence[tuple[complex, float]]) -> float:
    terms = []
    for i in range(len(points)):
        zi, si = points[i]
        for j in range(i + 1, len(points)):
            zj, sj = points[j]
            d = abs(zi - zj)
            if d <= DISTINCT_TOL:
                raise DegenerateConfigurationError(
                    f"coincident points {zi} and {zj} in correlation"
                )
            terms.append(2.0 * si * sj * math.log(d))
    return math.fsum(terms)


def coulomb_correlation_log_abs(divisor: SymmetricDivisor) -> float:
    """log of |product over finite pairs of (z_i - z_j)^(2 s_i s_j)|.

    Factors involving the point at infinity are dropped; this is the value
    of the correlation in the standard chart.
    """
    return _log_abs_pair_products(divisor.finite_weighted())


def coulomb_correlation_abs(divisor: SymmetricDivisor) -> float:
    return math.exp(coulomb_correlation_log_abs(divisor))


def _marked_values(marked: Iterable) -> list[tuple[SpherePoint, float]]:
    return [(SpherePoint.of(q), float(s)) for q, s in marked]


def partition_Z_log_abs(x: Sequence[complex], marked: Iterable) -> float:
    """log |Z| for growth points ``x`` and marked ``(point, charge)`` pairs.

    Z = prod_{i<j} (x_i-x_j)^2 * prod_{i<j} (q_i-q_j)^(2 s_i s_j)
        * prod_{i,j} (x_i-q_j)^(2 s_j), factors at infinity dropped.
    """
    pts: list[tuple[complex, float]] = [(complex(xi), 1.0) for xi in x]
    pts.extend((q.value, s) for q, s in _marked_values(marked) if q.finite)
    return _log_abs_pair_products(pts)


def partition_Z_abs(x: Sequence[complex], marked: Iterable) -> float:
    return math.exp(partition_Z_log_abs(x, marked))


def dlog_Z(x: Sequence[float], marked: Iterable, j: int) -> float:
    """Logarithmic derivative of Z in the j-th growth point (0-based).

    Equals sum_{k != j} 2/(x_j - x_k) + sum_l 2 s_l/(x_j - q_l), each term
    the derivative of the corresponding log factor of Z; the marked sum
    skips infinity. The result must be real for boundary configurations: an
    imaginary residue above ``IMAG_RESIDUE_TOL`` is an error, below it is
    truncated.
    """
    if not 0 <= j < len(x):
        raise IndexError(f"growth index {j} out of range")
    xj = complex(x[j])
    total = 0j
    for k, xk in enumerate(x):
        if k == j:
            continue
        d = xj - complex(xk)
        if abs(d) <= DISTINCT_TOL:
            raise DegenerateConfigurationError(f"growth points {xj} and {xk} coincide")
        total += 2.0 / d
    for q, s in _marked_values(marked):
        if q.is_infinity:
            continue
        d = xj - q.value
        if abs(d) <= DISTINCT_TOL:
            raise DegenerateConfigurationError(f"growth point {xj} hits marked point {q}")
        total += 2.0 * s / d
    if abs(total.imag) > IMAG_RESIDUE_TOL:
        raise DegenerateConfigurationError(
            f"dlog_Z imaginary residue {total.imag:.3e} exceeds {IMAG_RESIDUE_TOL:.0e}"
        )
    return total.real


@dataclass(frozen=True)
class MoebiusMap:
    """z -> (a z + b) / (c z + d) with nonzero determinant."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self) -> None:
        if abs(self.determinant) <= 1e-12:
            raise DegenerateConfigurationError("Moebius map is singular")

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    def apply(self, p: Union[SpherePoint, complex]) -> SpherePoint:
        p = SpherePoint.of(p)
        if p.is_infinity:
            if self.c == 0:
                return INFINITY
            return SpherePoint(self.a / self.c)
        denom = self.c * p.value + self.d
        if denom == 0:
            return INFINITY
        return SpherePoint((self.a * p.value + self.b) / denom)

    def derivative(self, z: complex) -> complex:
        denom = self.c * z + self.d
        return self.determinant / (denom * denom)

    def chart_derivative_abs(self, p: Union[SpherePoint, complex]) -> float:
        """|derivative| in the standard charts (1/z at infinity, both ends)."""
        p = SpherePoint.of(p)
        det = abs(self.determinant)
        if p.is_infinity:
            if self.c == 0:
                return abs(self.d / self.a)
            return det / abs(self.c) ** 2
        image_denom = self.c * p.value + self.d
        if image_denom == 0:
            # image at infinity: derivative of 1/phi at the pole
            return abs(self.c) ** 2 / det
        return det / abs(image_denom) ** 2

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """self after other."""
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )


def moebius_pushforward(divisor: SymmetricDivisor, m: MoebiusMap) -> SymmetricDivisor:
    """Image divisor under ``m``: points mapped, charges kept, tag ``sphere``.

    General maps do not preserve the boundary structure, so only distinctness
    is re-checked here.
    """
    growth = tuple(m.apply(p) for p in divisor.growth)
    marked = tuple((m.apply(q), s) for q, s in divisor.marked)
    image = SymmetricDivisor(SPHERE, growth, marked)
    pts = [p for p, _ in image.weighted_points()]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if _points_close(pts[i], pts[j], DISTINCT_TOL):
                raise DegenerateConfigurationError(
                    f"map collapses divisor points onto {pts[i]}"
                )
    return image


def moebius_invariance_gap(divisor: SymmetricDivisor, m: MoebiusMap) -> float:
    """Defect of the covariance identity for the correlation under ``m``.

    Returns |log|C[image]| + sum_j lambda_j log|D_j| - log|C[divisor]|| where
    D_j is the chart-corrected derivative at each divisor point. Zero for
    every neutral divisor, up to rounding.
    """
    image = moebius_pushforward(divisor, m)
    lhs = coulomb_correlation_log_abs(image)
    for p, s in divisor.weighted_points():
        lhs += conformal_dimension(s) * math.log(m.chart_derivative_abs(p))
    return abs(lhs - coulomb_correlation_log_abs(divisor))


def format_complex(z: complex) -> str:
    """Render a complex number as 'a+bi' with round-trip precision."""
    re, im = z.real, z.imag
    if im == 0:
        return repr(re)
    if re == 0:
        return f"{im!r}i"
    sign = "+" if im >= 0 else "-"
    return f"{re!r}{sign}{abs(im)!r}i"


def parse_complex(text: str) -> complex:
    """Parse 'a+bi' notation (also plain reals and 'i'/'-i')."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    js = s[:-1] + "j" if s.endswith("i") else s
    if js in ("j", "+j"):
        js = "1j"
    elif js == "-j":
        js = "-1j"
    else:
        # 'a+i' / 'a-i' with unit imaginary part
        if js.endswith(("+j", "-j")):
            js = js[:-1] + "1j"
    try:
        return complex(js)
    except ValueError as exc:
        raise ValueError(f"invalid complex literal {text!r}") from exc


def parse_point(text: str) -> SpherePoint:
    s = text.strip().lower()
    if s in ("inf", "infinity", "oo"):
        return INFINITY
    return SpherePoint(parse_complex(text))
