"""YAML scene parsing, line-numbered diagnostics, presets, round-trips."""

import math

import pytest

from slezero.errors import ConfigError
from slezero.loewner import Parametrization
from slezero.scene import (
    OUTPUT_KINDS,
    PRESET_NAMES,
    LoewnerParams,
    SceneConfig,
    parse_config,
    preset,
    serialize_config,
    single_curve_scene,
)
from slezero.divisors import DISK, HALF_PLANE, validate
from slezero.tracing import TraceParams

MINIMAL = """\
domain: half_plane
growth: ["0.0"]
marked:
  - point: inf
    charge: "-3"
"""


def diag_lines(err: ConfigError) -> list[int]:
    return [n for n, _ in err.diagnostics]


def diag_text(err: ConfigError) -> str:
    return "; ".join(msg for _, msg in err.diagnostics)


class TestParse:
    def test_minimal_config(self):
        scene = parse_config(MINIMAL)
        assert scene.divisor.domain == HALF_PLANE
        assert [p.value for p in scene.divisor.growth] == [0.0]
        assert scene.divisor.marked[0][0].is_infinity
        assert scene.trace == TraceParams()
        assert scene.loewner == LoewnerParams()
        assert scene.rates is None
        assert scene.name is None

    def test_empty_config(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("")
        assert exc.value.diagnostics == [(0, "empty config")]

    def test_syntax_error_carries_line(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("domain: half_plane\ngrowth: [0.0\n")
        assert "syntax error" in diag_text(exc.value)

    def test_top_level_must_be_mapping(self):
        with pytest.raises(ConfigError, match="config must be a mapping"):
            parse_config("- 1\n- 2\n")

    def test_unknown_key_reports_its_line(self):
        text = MINIMAL + "wavelength: 3\n"
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert (6, "unknown key 'wavelength'") in exc.value.diagnostics

    def test_duplicate_key_reports_its_line(self):
        text = MINIMAL + "domain: disk\n"
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert (6, "duplicate key 'domain'") in exc.value.diagnostics

    def test_domain_required_without_preset(self):
        with pytest.raises(ConfigError, match="domain is required"):
            parse_config('growth: ["0.0"]\nmarked: []\n')

    def test_bad_domain_value(self):
        with pytest.raises(ConfigError, match="domain must be"):
            parse_config(MINIMAL.replace("half_plane", "strip"))

    def test_empty_growth_list(self):
        with pytest.raises(ConfigError, match="at least one growth point"):
            parse_config(MINIMAL.replace('["0.0"]', "[]"))

    def test_growth_must_be_finite(self):
        with pytest.raises(ConfigError, match="growth points must be finite"):
            parse_config(MINIMAL.replace('"0.0"', "inf"))

    def test_bad_charge_reports_its_line(self):
        with pytest.raises(ConfigError) as exc:
            parse_config(MINIMAL.replace('"-3"', '"three"'))
        line, msg = exc.value.diagnostics[0]
        assert line == 5
        assert msg.startswith("bad charge")

    def test_marked_entry_needs_point_and_charge(self):
        with pytest.raises(ConfigError, match="needs both point and charge"):
            parse_config('domain: half_plane\ngrowth: ["0.0"]\nmarked:\n  - point: inf\n')

    def test_invalid_divisor_surfaces_validation(self):
        # neutrality broken: 1 - 4 != -2
        with pytest.raises(ConfigError, match="invalid divisor"):
            parse_config(MINIMAL.replace('"-3"', '"-4"'))

    def test_growth_off_boundary_rejected(self):
        text = 'domain: disk\ngrowth: ["0.5"]\nmarked:\n  - point: inf\n    charge: "-3"\n'
        with pytest.raises(ConfigError, match="invalid divisor"):
            parse_config(text)

    def test_unknown_output_kind(self):
        with pytest.raises(ConfigError, match="unknown output kind"):
            parse_config(MINIMAL + "outputs: [field_png]\n")


class TestSections:
    def test_trace_overrides(self):
        scene = parse_config(
            MINIMAL + "trace:\n  step: 0.01\n  capture_radius: 0.005\n  adaptive: false\n"
        )
        assert scene.trace.step == 0.01
        assert scene.trace.singularity_capture_radius == 0.005
        assert scene.trace.adaptive is False
        assert scene.trace.max_arc_length == TraceParams().max_arc_length

    def test_unknown_trace_key(self):
        with pytest.raises(ConfigError, match="unknown trace key"):
            parse_config(MINIMAL + "trace:\n  stride: 0.01\n")

    def test_capture_radius_must_exceed_margin(self):
        with pytest.raises(ConfigError, match="capture_radius must exceed domain_margin"):
            parse_config(MINIMAL + "trace:\n  capture_radius: 1e-7\n")

    def test_loewner_overrides_and_tracked(self):
        scene = parse_config(
            MINIMAL + 'loewner:\n  T: 0.5\n  tracked: ["2i", "1+1i"]\n'
        )
        assert scene.loewner.T == 0.5
        assert scene.loewner.tracked == (2j, 1 + 1j)
        assert scene.loewner.dt == LoewnerParams().dt

    def test_loewner_positivity(self):
        with pytest.raises(ConfigError, match="loewner.T must be positive"):
            parse_config(MINIMAL + "loewner:\n  T: -0.5\n")
        with pytest.raises(ConfigError, match="loewner.dt must be positive"):
            parse_config(MINIMAL + "loewner:\n  dt: 0.0\n")

    def test_constant_rates(self):
        scene = parse_config(MINIMAL + "rates: [2.0]\n")
        assert scene.rates == Parametrization.constant([2.0])

    def test_rate_schedules(self):
        scene = parse_config(MINIMAL + "rates:\n  - [[0.0, 1.0], [0.5, 2.0]]\n")
        assert scene.rates.schedules == (((0.0, 1.0), (0.5, 2.0)),)

    def test_rates_must_be_positive(self):
        with pytest.raises(ConfigError, match="rates must be positive"):
            parse_config(MINIMAL + "rates: [-1.0]\n")

    def test_schedule_must_start_at_zero(self):
        with pytest.raises(ConfigError, match="first breakpoint must be at t=0"):
            parse_config(MINIMAL + "rates:\n  - [[0.1, 1.0]]\n")

    def test_rate_count_checked_against_growth(self):
        with pytest.raises(ConfigError, match="one rate schedule per growth point"):
            parse_config(MINIMAL + "rates: [1.0, 1.0]\n")


class TestChargeGranularity:
    THIRDS = (
        "domain: half_plane\n"
        'growth: ["0.0"]\n'
        "marked:\n"
        '  - point: "1.0"\n'
        '    charge: "1/3"\n'
        '  - point: "-1.0"\n'
        '    charge: "1/3"\n'
        "  - point: inf\n"
        '    charge: "-11/3"\n'
    )

    def test_third_charges_fine_for_flow_outputs(self):
        scene = parse_config(self.THIRDS + "outputs: [hull_csv, motion_report]\n")
        assert validate(scene.divisor).ok

    def test_third_charges_rejected_for_field_outputs(self):
        with pytest.raises(ConfigError, match="not a half-integer") as exc:
            parse_config(self.THIRDS + "outputs: [hull_csv, field_svg]\n")
        assert "flow outputs are fine" in diag_text(exc.value)
        assert diag_lines(exc.value) == [4, 6, 8]


class TestPresets:
    def test_names(self):
        assert PRESET_NAMES == ("fig1", "fig2", "fig3")

    def test_unknown_preset_raises(self):
        with pytest.raises(KeyError):
            preset("fig9")

    def test_unknown_preset_in_config(self):
        with pytest.raises(ConfigError, match="unknown preset 'fig9'"):
            parse_config("preset: fig9\n")

    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_presets_are_valid_disk_scenes(self, name):
        scene = preset(name)
        assert scene.divisor.domain == DISK
        assert len(scene.divisor.growth) == 3
        assert validate(scene.divisor).ok
        assert scene.outputs == OUTPUT_KINDS
        assert scene.name == name

    def test_fig3_uses_a_tighter_capture_radius(self):
        assert preset("fig3").trace.singularity_capture_radius == 1e-4
        assert preset("fig1").trace == TraceParams()

    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_serialize_parse_round_trip(self, name):
        scene = preset(name)
        again = parse_config(serialize_config(scene))
        assert again == scene

    def test_round_trip_with_rates_and_tracked(self):
        base = single_curve_scene()
        scene = SceneConfig(
            divisor=base.divisor,
            trace=TraceParams(step=0.002, adaptive=False),
            loewner=LoewnerParams(T=0.3, dt=1e-3, lift=1e-5, tracked=(2j, 3 + 0.5j)),
            rates=Parametrization((((0.0, 1.0), (0.25, 2.0)),)),
            outputs=("hull_csv",),
            name="custom",
        )
        again = parse_config(serialize_config(scene))
        assert again == scene

    def test_preset_expanded_by_reference(self):
        scene = parse_config("preset: fig1\n")
        assert scene == preset("fig1")

    def test_preset_with_overrides(self):
        scene = parse_config("preset: fig1\nloewner:\n  T: 0.05\noutputs: [hull_csv]\n")
        assert scene.divisor == preset("fig1").divisor
        assert scene.loewner.T == 0.05
        assert scene.loewner.dt == preset("fig1").loewner.dt
        assert scene.outputs == ("hull_csv",)

    def test_single_curve_scene(self):
        scene = single_curve_scene()
        assert validate(scene.divisor).ok
        assert scene.divisor.domain == HALF_PLANE
        assert scene.loewner.T == 1.0
        assert scene.loewner.tracked == (2j,)
