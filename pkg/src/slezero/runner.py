"""Scene execution: artifact production and verification suites.

``run`` computes whatever the scene's output list asks for and writes the
artifacts; ``verify`` replays conservation laws and cross-module identities
on a scene and reports per-check margins.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conformal, divisors, loewner, outputs, quadratic, tracing
from .divisors import HALF_PLANE, MoebiusMap, SymmetricDivisor, format_complex
from .errors import DegenerateConfigurationError
from .loewner import Evolution, HullSample, MotionIntegralReport, Parametrization
from .quadratic import QuadDifferential
from .scene import SceneConfig
from .tracing import AsymptoticReport, Trajectory

HULL_SAMPLES = 33
MOEBIUS_TRIALS = 20
MOEBIUS_LIMIT = 1e-9
FD_STEP = 1e-6
FD_LIMIT = 1e-6
MOTION_LIMIT = 1e-6
EQUIVALENCE_LIMIT = 5e-3


@dataclass
class RunResult:
    scene: SceneConfig
    qd: QuadDifferential | None = None
    trajectories: list[Trajectory] = field(default_factory=list)
    analysis: AsymptoticReport | None = None
    evolution: Evolution | None = None
    hull: list[HullSample] = field(default_factory=list)
    motion: list[MotionIntegralReport] = field(default_factory=list)
    written: list[Path] = field(default_factory=list)


def _parametrization(scene: SceneConfig) -> Parametrization:
    if scene.rates is not None:
        return scene.rates
    return Parametrization.constant([1.0] * len(scene.divisor.growth))


def _flow_divisor(scene: SceneConfig) -> SymmetricDivisor:
    if scene.divisor.domain == HALF_PLANE:
        return scene.divisor
    image, _ = conformal.transport(scene.divisor, HALF_PLANE)
    return image


def _hull_times(t_end: float) -> list[float]:
    return [t_end * i / (HULL_SAMPLES - 1) for i in range(HULL_SAMPLES)]


def _motion_payload(evolution: Evolution, reports: list[MotionIntegralReport]) -> dict:
    return {
        "t_final": evolution.final.t,
        "states": len(evolution.states),
        "collision": (
            None
            if evolution.collision is None
            else {
                "bracket": list(evolution.collision),
                "note": evolution.collision_note,
            }
        ),
        "reports": [
            {
                "z": format_complex(r.z),
                "samples": r.n_samples,
                "t_first": r.t_first,
                "t_last": r.t_last,
                "log_abs_initial": r.log_abs_initial,
                "max_rel_drift": r.max_rel_drift,
                "max_arg_drift": r.max_arg_drift,
                "alive": r.alive,
                "death_time": r.death_time,
            }
            for r in reports
        ],
    }


def run(scene: SceneConfig, out_dir: Path | str) -> RunResult:
    """Produce every artifact the scene requests into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = RunResult(scene=scene)

    if scene.wants_quadratic:
        result.qd = quadratic.build_Q(scene.divisor)
        result.trajectories = tracing.launch_all(result.qd, scene.trace)
        result.analysis = tracing.analyze(result.trajectories, result.qd)

    if scene.wants_flow:
        flow_divisor = _flow_divisor(scene)
        lo = scene.loewner
        result.evolution = loewner.evolve(
            flow_divisor, lo.T, lo.dt, _parametrization(scene), lo.tracked
        )
        if "hull_csv" in scene.outputs:
            result.hull = loewner.trace_hull(
                result.evolution, _hull_times(result.evolution.final.t), lo.lift
            )
        if "motion_report" in scene.outputs:
            result.motion = [
                loewner.motion_integral(result.evolution, z) for z in lo.tracked
            ]

    def write(name: str, text: str) -> None:
        path = out / name
        path.write_text(text)
        result.written.append(path)

    if "field_svg" in scene.outputs:
        write("field.svg", outputs.field_svg(result.qd, result.trajectories))
    if "trajectories_csv" in scene.outputs:
        for i, traj in enumerate(result.trajectories):
            write(f"trajectory_{i}.csv", outputs.trajectory_csv(traj))
    if "hull_csv" in scene.outputs:
        write("hull.csv", outputs.hull_csv(result.hull))
    if "motion_report" in scene.outputs:
        write(
            "motion_report.json",
            outputs.report_text(_motion_payload(result.evolution, result.motion)),
        )
    if "analysis_report" in scene.outputs:
        write(
            "analysis_report.json",
            outputs.report_text(outputs.analysis_payload(result.trajectories, result.analysis)),
        )
    return result


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float | None

    @property
    def ok(self) -> bool:
        return self.limit is None or self.value <= self.limit

    def line(self) -> str:
        if self.limit is None:
            return f"{self.name}: value={self.value:.3e} (informational)"
        verdict = "PASS" if self.ok else "FAIL"
        return f"{self.name}: value={self.value:.3e} limit={self.limit:.1e} {verdict}"


def _random_moebius(rng: random.Random) -> MoebiusMap:
    while True:
        a, b, c, d = (
            complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(4)
        )
        if abs(a * d - b * c) >= 0.1:
            return MoebiusMap(a, b, c, d)


def _moebius_check(divisor: SymmetricDivisor, seed: int) -> Check:
    rng = random.Random(seed)
    worst = 0.0
    trials = 0
    while trials < MOEBIUS_TRIALS:
        m = _random_moebius(rng)
        try:
            gap = divisors.moebius_invariance_gap(divisor, m)
        except DegenerateConfigurationError:
            continue  # map sent two divisor points together; resample
        worst = max(worst, gap)
        trials += 1
    return Check("invariance/moebius_gap", worst, MOEBIUS_LIMIT)


def _dlog_fd_check(divisor: SymmetricDivisor) -> Check:
    x = [p.value.real for p in divisor.growth]
    worst = 0.0
    for j in range(len(x)):
        exact = divisors.dlog_Z(x, divisor.marked, j)
        hi = list(x)
        lo = list(x)
        hi[j] += FD_STEP
        lo[j] -= FD_STEP
        fd = (
            divisors.partition_Z_log_abs(hi, divisor.marked)
            - divisors.partition_Z_log_abs(lo, divisor.marked)
        ) / (2.0 * FD_STEP)
        worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
    return Check("invariance/dlog_fd", worst, FD_LIMIT)


def _polyline_distance(z: complex, points: np.ndarray) -> float:
    a = points[:-1]
    b = points[1:]
    ab = b - a
    denom = np.maximum(np.abs(ab) ** 2, 1e-300)
    t = np.clip(((z - a) * np.conj(ab)).real / denom, 0.0, 1.0)
    proj = a + t * ab
    return float(np.min(np.abs(z - proj)))


def _suite_invariance(scene: SceneConfig, seed: int) -> list[Check]:
    flow_divisor = _flow_divisor(scene)
    return [
        _moebius_check(scene.divisor, seed),
        _dlog_fd_check(flow_divisor),
    ]


def _suite_motion(scene: SceneConfig) -> list[Check]:
    flow_divisor = _flow_divisor(scene)
    lo = scene.loewner
    tracked = lo.tracked or (2j,)
    evolution = loewner.evolve(flow_divisor, lo.T, lo.dt, _parametrization(scene), tracked)
    checks = []
    for z in tracked:
        report = loewner.motion_integral(evolution, z)
        tag = format_complex(z)
        checks.append(Check(f"motion/abs_drift[z={tag}]", report.max_rel_drift, MOTION_LIMIT))
        checks.append(Check(f"motion/arg_drift[z={tag}]", report.max_arg_drift, None))
    return checks


def _suite_equivalence(scene: SceneConfig) -> list[Check]:
    flow_divisor = _flow_divisor(scene)
    lo = scene.loewner
    evolution = loewner.evolve(flow_divisor, lo.T, lo.dt, _parametrization(scene))
    qd = quadratic.build_Q(flow_divisor)
    trajectories = tracing.launch_all(qd, scene.trace)
    hull = loewner.trace_hull(evolution, _hull_times(evolution.final.t), lo.lift)
    polylines = [np.array(t.points) for t in trajectories]
    worst = [0.0] * len(polylines)
    for sample in hull:
        d = _polyline_distance(sample.point, polylines[sample.curve])
        worst[sample.curve] = max(worst[sample.curve], d)
    return [
        Check(f"equivalence/hull_distance[curve={j}]", w, EQUIVALENCE_LIMIT)
        for j, w in enumerate(worst)
    ]


SUITES = ("invariance", "motion", "equivalence")


def verify(scene: SceneConfig, suite: str = "all", seed: int = 1234) -> tuple[bool, list[str]]:
    """Run the selected verification suites; returns (all passed, lines)."""
    if suite not in SUITES and suite != "all":
        raise ValueError(f"unknown suite {suite!r}")
    checks: list[Check] = []
    if suite in ("all", "invariance"):
        checks.extend(_suite_invariance(scene, seed))
    if suite in ("all", "motion"):
        checks.extend(_suite_motion(scene))
    if suite in ("all", "equivalence"):
        checks.extend(_suite_equivalence(scene))
    lines = [c.line() for c in checks]
    gated = [c for c in checks if c.limit is not None]
    ok = all(c.ok for c in gated)
    lines.append(
        f"{'ok' if ok else 'FAILED'}: {sum(c.ok for c in gated)}/{len(gated)} checks passed"
    )
    return ok, lines
