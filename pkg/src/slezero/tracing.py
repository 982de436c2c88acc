"""Horizontal trajectory tracing and asymptotic analysis.

Trajectories are integral curves of the unit horizontal line field of a
quadratic differential, traced with a classical 4th-order one-step method in
arc length. The field is only defined up to sign, so every stage evaluation
is aligned with the direction of the previous step; launches from growth
points start on a separatrix, offset by the capture radius.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

from .divisors import DISK, HALF_PLANE
from .errors import LaunchError, SingularityProximityError, SleZeroError, WindingUndefinedError
from .quadratic import PROXIMITY_TOL, QuadDifferential, classify_singularities

TWO_PI = 2.0 * math.pi
SEPARATRIX_TOL = 1e-3
MAX_TURN = 0.2
REGROW_TURN = 0.05


@dataclass(frozen=True)
class TraceParams:
    step: float = 1e-3
    max_arc_length: float = 50.0
    singularity_capture_radius: float = 1e-3
    domain_margin: float = 1e-6
    adaptive: bool = True


@dataclass(frozen=True)
class Terminal:
    kind: str  # reached_singularity | left_domain | exhausted_arc_length
    point: complex | None = None


@dataclass(frozen=True)
class Trajectory:
    points: tuple[complex, ...]
    arc_lengths: tuple[float, ...]
    terminal: Terminal
    windings: tuple[tuple[complex, float], ...]
    start: complex
    initial_dir: complex

    @property
    def arc_length(self) -> float:
        return self.arc_lengths[-1]

    def winding_about(self, q: complex) -> float:
        for point, total in self.windings:
            if point == q:
                return total
        raise KeyError(f"{q} is not a marked point of this trajectory")


def winding_angle(trajectory: Union["Trajectory", Sequence[complex]], base: complex) -> float:
    """Total turning of the polyline as seen from ``base``, in radians."""
    points = trajectory.points if isinstance(trajectory, Trajectory) else trajectory
    return math.fsum(_winding_increments(points, base))


def _winding_increments(points: Sequence[complex], base: complex) -> list[float]:
    out = []
    prev = points[0] - base
    if abs(prev) <= 1e-12:
        raise WindingUndefinedError(f"polyline passes through {base}")
    for z in points[1:]:
        cur = z - base
        if abs(cur) <= 1e-12:
            raise WindingUndefinedError(f"polyline passes through {base}")
        out.append(cmath.phase(cur / prev))
        prev = cur
    return out


def _inside(domain: str, z: complex, margin: float) -> bool:
    if domain == HALF_PLANE:
        return z.imag >= -margin
    if domain == DISK:
        return abs(z) <= 1.0 + margin
    return True


def trace(
    qd: QuadDifferential,
    start: complex,
    initial_dir: complex,
    params: TraceParams = TraceParams(),
) -> Trajectory:
    """Trace one horizontal trajectory from ``start``.

    A start within the capture radius of a zero is treated as a launch from
    that zero: the direction must lie within 1e-3 radians of one of its
    separatrices and integration begins one capture radius out along it.
    The trace stops on entering the capture disk of any other singularity,
    on leaving the domain by more than the margin, or on exhausting the arc
    length budget.
    """
    if initial_dir == 0:
        raise LaunchError("initial direction must be nonzero")
    direction = initial_dir / abs(initial_dir)
    capture = params.singularity_capture_radius

    launch_point: complex | None = None
    for info in classify_singularities(qd):
        if abs(start - info.point) <= capture:
            if info.order <= 0:
                raise LaunchError(f"cannot launch from the pole at {info.point}")
            want = cmath.phase(direction)
            gap = min(
                abs((want - theta + math.pi) % TWO_PI - math.pi) for theta in info.angles
            )
            if gap > SEPARATRIX_TOL:
                raise LaunchError(
                    f"direction {want:.6f} rad is {gap:.2e} rad off every separatrix of {info.point}"
                )
            launch_point = info.point
            break

    marked = [(p, order) for p, order in qd.marked_factors]
    wind_totals = [0.0] * len(marked)
    singular = [p for p, _ in qd.factors]

    if launch_point is not None:
        z = launch_point + capture * direction
        points = [launch_point, z]
        arcs = [0.0, abs(z - launch_point)]
        for i, (q, _) in enumerate(marked):
            wind_totals[i] += cmath.phase((z - q) / (launch_point - q))
        escaped = False
    else:
        z = start
        points = [z]
        arcs = [0.0]
        escaped = True

    phase_arg = cmath.phase(qd.phase)
    factor_data = [(p.real, p.imag, 0.5 * order) for p, order in qd.factors]
    prox_sq = PROXIMITY_TOL * PROXIMITY_TOL

    def stage_dir(zr: float, zi: float, ref_r: float, ref_i: float) -> tuple[float, float]:
        total = phase_arg
        for pr, pi_, half in factor_data:
            dr = zr - pr
            di = zi - pi_
            if dr * dr + di * di < prox_sq:
                raise SingularityProximityError(
                    f"stage point {complex(zr, zi)} within {PROXIMITY_TOL:.0e} of {complex(pr, pi_)}"
                )
            total += half * math.atan2(di, dr)
        ur = math.cos(total)
        ui = -math.sin(total)
        if ur * ref_r + ui * ref_i < 0.0:
            return -ur, -ui
        return ur, ui

    h = params.step
    h_min = params.step * 2.0**-20
    dir_r, dir_i = direction.real, direction.imag
    terminal: Terminal | None = None
    arc = arcs[-1]

    while terminal is None:
        if arc >= params.max_arc_length:
            terminal = Terminal("exhausted_arc_length")
            break
        zr, zi = z.real, z.imag
        try:
            while True:
                k1r, k1i = stage_dir(zr, zi, dir_r, dir_i)
                k2r, k2i = stage_dir(zr + 0.5 * h * k1r, zi + 0.5 * h * k1i, dir_r, dir_i)
                k3r, k3i = stage_dir(zr + 0.5 * h * k2r, zi + 0.5 * h * k2i, dir_r, dir_i)
                k4r, k4i = stage_dir(zr + h * k3r, zi + h * k3i, dir_r, dir_i)
                turn = abs(math.atan2(k1r * k4i - k1i * k4r, k1r * k4r + k1i * k4i))
                if params.adaptive and turn > MAX_TURN and h > h_min:
                    h *= 0.5
                    continue
                break
        except SingularityProximityError:
            # a stage landed essentially on a singular point
            nearest = min(singular, key=lambda p: abs(z - p))
            terminal = Terminal("reached_singularity", nearest)
            break
        tr = (k1r + 2.0 * (k2r + k3r) + k4r) / 6.0
        ti = (k1i + 2.0 * (k2i + k3i) + k4i) / 6.0
        z_new = complex(zr + h * tr, zi + h * ti)
        norm = math.hypot(tr, ti)
        if norm > 0.0:
            dir_r, dir_i = tr / norm, ti / norm
        seg = abs(z_new - z)
        arc += seg
        for i, (q, _) in enumerate(marked):
            wind_totals[i] += cmath.phase((z_new - q) / (z - q))
        z = z_new
        points.append(z)
        arcs.append(arc)
        if params.adaptive and turn < REGROW_TURN and h < params.step:
            h = min(2.0 * h, params.step)
        if not escaped and abs(z - launch_point) > 2.0 * capture:
            escaped = True
        for p in singular:
            if p == launch_point and not escaped:
                continue
            if abs(z - p) <= capture:
                terminal = Terminal("reached_singularity", p)
                break
        if terminal is None and not _inside(qd.domain, z, params.domain_margin):
            terminal = Terminal("left_domain")

    return Trajectory(
        points=tuple(points),
        arc_lengths=tuple(arcs),
        terminal=terminal,
        windings=tuple((q, w) for (q, _), w in zip(marked, wind_totals)),
        start=start,
        initial_dir=direction,
    )


def launch_all(qd: QuadDifferential, params: TraceParams = TraceParams()) -> list[Trajectory]:
    """One trajectory per growth point, along its interior separatrix.

    The separatrix is chosen by positive inner product with the inward
    boundary normal, ties broken by the smallest angle to it.
    """
    infos = classify_singularities(qd)
    out = []
    for i in range(qd.n_growth):
        info = infos[i]
        p = info.point
        if qd.domain == HALF_PLANE:
            normal = 1j
        else:
            normal = -p / abs(p)
        best = None
        best_dot = 0.0
        for theta in info.angles:
            d = cmath.exp(1j * theta)
            dot = d.real * normal.real + d.imag * normal.imag
            if dot > 1e-12 and dot > best_dot + 1e-12:
                best, best_dot = d, dot
        if best is None:
            raise LaunchError(f"no interior separatrix at growth point {p}")
        out.append(trace(qd, p, best, params))
    return out


@dataclass(frozen=True)
class ConvergingPair:
    first: int
    second: int
    singularity: complex
    angle_gap: float


@dataclass(frozen=True)
class SpiralFlag:
    trajectory: int
    center: complex
    winding: float


@dataclass(frozen=True)
class AsymptoticReport:
    pairs: tuple[ConvergingPair, ...]
    spirals: tuple[SpiralFlag, ...]

    @property
    def empty(self) -> bool:
        return not self.pairs and not self.spirals


def _approach_direction(traj: Trajectory, pole: complex) -> complex | None:
    """Unit chord from the last traced point into the capturing pole.

    Averaged curve tangents lag badly in the capture region, where the
    trajectory is still bending onto its asymptotic ray; the chord into
    the pole uses the closest-in point and converges with the capture
    radius.
    """
    pts = traj.points
    if not pts:
        return None
    chord = pole - pts[-1]
    if chord != 0:
        return chord / abs(chord)
    if len(pts) >= 2:
        seg = pts[-1] - pts[-2]
        if seg != 0:
            return seg / abs(seg)
    return None


def analyze(
    trajectories: Sequence[Trajectory],
    qd: QuadDifferential,
    spiral_threshold: float = 4.0 * math.pi,
    angle_gap_threshold: float = 0.05,
) -> AsymptoticReport:
    """Detect common asymptotic directions and spiraling.

    A converging pair is two trajectories captured by the same pole of order
    at least 3 whose approach directions into the pole differ by less than
    the gap threshold. A spiral is a trajectory whose winding about some marked
    point exceeds the threshold and is eventually monotone (the nonzero
    increments over the last 75% of its steps share one sign).
    """
    by_terminal: dict[complex, list[int]] = {}
    for i, traj in enumerate(trajectories):
        t = traj.terminal
        if t.kind != "reached_singularity" or t.point is None:
            continue
        try:
            order = qd.order_at(t.point)
        except KeyError:
            continue
        if order <= -3:
            by_terminal.setdefault(t.point, []).append(i)

    pairs = []
    for point, members in sorted(by_terminal.items(), key=lambda kv: (kv[0].real, kv[0].imag)):
        tangents = {i: _approach_direction(trajectories[i], point) for i in members}
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                i, j = members[a], members[b]
                ti, tj = tangents[i], tangents[j]
                if ti is None or tj is None:
                    continue
                dot = max(-1.0, min(1.0, ti.real * tj.real + ti.imag * tj.imag))
                gap = math.acos(dot)
                if gap < angle_gap_threshold:
                    pairs.append(ConvergingPair(i, j, point, gap))

    spirals = []
    for i, traj in enumerate(trajectories):
        for q, _ in traj.windings:
            incs = _winding_increments(traj.points, q)
            total = math.fsum(incs)
            if abs(total) <= spiral_threshold:
                continue
            tail = incs[len(incs) // 4 :]
            signs = {1 if v > 0 else -1 for v in tail if v != 0.0}
            if len(signs) == 1:
                spirals.append(SpiralFlag(i, q, total))

    return AsymptoticReport(tuple(pairs), tuple(spirals))
