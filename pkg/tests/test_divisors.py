"""Divisor validation, correlation values, and Moebius covariance."""

import math
import random
from fractions import Fraction

import pytest

from conftest import (
    disk_divisor,
    half_plane_divisor,
    random_moebius,
    real_moebius,
)
from slezero.divisors import (
    Charge,
    DISK,
    HALF_PLANE,
    INFINITY,
    MoebiusMap,
    SPHERE,
    SpherePoint,
    SymmetricDivisor,
    conformal_dimension,
    dlog_Z,
    format_complex,
    moebius_invariance_gap,
    moebius_pushforward,
    parse_complex,
    parse_point,
    partition_Z_abs,
    partition_Z_log_abs,
    validate,
)
from slezero.errors import DegenerateConfigurationError


def product_oracle(x, marked):
    """|Z| by direct multiplication of the pair factors (no log-space)."""
    pts = [(complex(v), 1.0) for v in x]
    for q, s in marked:
        p = SpherePoint.of(q)
        if p.finite:
            pts.append((p.value, float(Charge.of(s))))
    result = 1.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            zi, si = pts[i]
            zj, sj = pts[j]
            result *= abs(zi - zj) ** (2.0 * si * sj)
    return result


class TestPartitionFunction:
    def test_two_curve_conjugate_pair_value(self):
        # |x1-x2|^2 = 4, |q-conj(q)|^2 = 4, four cross factors |sqrt2|^-2 each
        x = (0.0, 2.0)
        marked = ((1 + 1j, -1), (1 - 1j, -1))
        assert partition_Z_abs(x, marked) == pytest.approx(1.0, rel=1e-12)
        assert partition_Z_log_abs(x, marked) == pytest.approx(0.0, abs=1e-12)

    def test_single_curve_conjugate_pair_value(self):
        x = (0.0,)
        marked = ((1j, -1), (-1j, -1), ("inf", -1))
        assert partition_Z_abs(x, marked) == pytest.approx(4.0, rel=1e-12)

    def test_factors_at_infinity_are_dropped(self):
        x = (0.0, 2.0)
        base = ((1 + 1j, -1), (1 - 1j, -1))
        assert partition_Z_log_abs(x, base + (("inf", -2),)) == pytest.approx(
            partition_Z_log_abs(x, base), abs=0
        )

    def test_matches_product_oracle(self):
        rng = random.Random(101)
        for _ in range(25):
            div = half_plane_divisor(rng)
            x = [p.value for p in div.growth]
            got = partition_Z_log_abs(x, div.marked)
            want = product_oracle(x, div.marked)
            assert math.exp(got) == pytest.approx(want, rel=1e-9)

    def test_coincident_points_rejected(self):
        with pytest.raises(DegenerateConfigurationError):
            partition_Z_log_abs((0.0, 0.0), ())


class TestDlogZ:
    def test_closed_form_attracting_pair(self):
        # symmetric pair straddling a charge -2 at the origin
        x = (-1.0, 1.0)
        marked = ((0.0, -2), ("inf", -2))
        assert dlog_Z(x, marked, 1) == pytest.approx(-3.0, abs=1e-14)
        assert dlog_Z(x, marked, 0) == pytest.approx(3.0, abs=1e-14)

    def test_matches_finite_difference(self):
        rng = random.Random(202)
        h = 1e-6
        for _ in range(50):
            div = half_plane_divisor(rng)
            x = [p.value.real for p in div.growth]
            j = rng.randrange(len(x))
            up = list(x)
            dn = list(x)
            up[j] += h
            dn[j] -= h
            fd = (
                partition_Z_log_abs(up, div.marked)
                - partition_Z_log_abs(dn, div.marked)
            ) / (2.0 * h)
            got = dlog_Z(x, div.marked, j)
            assert got == pytest.approx(fd, rel=1e-6, abs=1e-6)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            dlog_Z((0.0,), (), 1)

    def test_growth_collision_rejected(self):
        with pytest.raises(DegenerateConfigurationError):
            dlog_Z((0.0, 1e-13), (), 0)


class TestValidate:
    def test_presets_are_admissible(self):
        from slezero.scene import PRESET_NAMES, preset

        for name in PRESET_NAMES:
            report = validate(preset(name).divisor)
            assert report.ok, f"{name}: {report}"

    def test_neutrality_exact_for_half_integers(self):
        # 1 growth + (-1) + (-3/2) + (-1/2) = -2 exactly
        ok = SymmetricDivisor.half_plane(
            [0.0], [(2.0, -1), (3.0, "-3/2"), ("inf", "-1/2")]
        )
        assert validate(ok).ok
        bad = SymmetricDivisor.half_plane(
            [0.0], [(2.0, -1), (3.0, "-3/2"), ("inf", "-1")]
        )
        assert any("charge" in p for p in validate(bad).problems)

    def test_neutrality_tolerance_for_raw_reals(self):
        near = SymmetricDivisor.half_plane(
            [0.0], [(2.0, Charge(0, 1, -3.0 + 5e-11))]
        )
        assert validate(near).ok
        far = SymmetricDivisor.half_plane([0.0], [(2.0, Charge(0, 1, -3.0 + 1e-9))])
        assert not validate(far).ok

    def test_growth_must_sit_on_boundary(self):
        off = SymmetricDivisor.half_plane([0.5j], [("inf", -3)])
        assert any("real axis" in p for p in validate(off).problems)
        off_disk = SymmetricDivisor.disk([0.5], [("inf", -2), (0.0, -2)])
        assert any("unit circle" in p for p in validate(off_disk).problems)

    def test_marked_points_need_symmetry_partners(self):
        lone = SymmetricDivisor.half_plane([0.0], [(1 + 1j, -1), ("inf", -2)])
        assert any("symmetry partner" in p for p in validate(lone).problems)
        paired = SymmetricDivisor.half_plane(
            [0.0], [(1 + 1j, -1), (1 - 1j, -1), ("inf", -1)]
        )
        assert validate(paired).ok

    def test_disk_inversion_pairs(self):
        q = 0.5 + 0.25j
        mirror = 1.0 / q.conjugate()
        good = SymmetricDivisor.disk([1.0], [(q, -1), (mirror, -1), (1j, -1)])
        assert validate(good).ok
        lopsided = SymmetricDivisor.disk([1.0], [(q, -1), (mirror, -2), (1j, 0)])
        assert not validate(lopsided).ok

    def test_origin_pairs_with_infinity_on_disk(self):
        div = SymmetricDivisor.disk([1.0, -1.0], [(0.0, -2), ("inf", -2)])
        assert validate(div).ok

    def test_empty_growth_rejected(self):
        report = validate(SymmetricDivisor.half_plane([], [("inf", -2)]))
        assert any("no growth points" in p for p in report.problems)

    def test_coincident_points_reported(self):
        report = validate(SymmetricDivisor.half_plane([0.0, 0.0], [("inf", -4)]))
        assert any("coincide" in p for p in report.problems)

    def test_random_generators_produce_valid_divisors(self):
        rng = random.Random(303)
        for _ in range(40):
            assert validate(half_plane_divisor(rng)).ok
            assert validate(disk_divisor(rng)).ok


class TestMoebius:
    def test_invariance_gap_half_plane(self):
        rng = random.Random(404)
        for _ in range(30):
            div = half_plane_divisor(rng)
            for make in (random_moebius, real_moebius):
                for _ in range(3):
                    try:
                        gap = moebius_invariance_gap(div, make(rng))
                    except DegenerateConfigurationError:
                        continue
                    assert gap < 1e-9
                    break

    def test_invariance_gap_disk(self):
        rng = random.Random(505)
        for _ in range(30):
            div = disk_divisor(rng)
            for _ in range(3):
                try:
                    gap = moebius_invariance_gap(div, random_moebius(rng))
                except DegenerateConfigurationError:
                    continue
                assert gap < 1e-9
                break

    def test_pushforward_swaps_zero_and_infinity(self):
        div = SymmetricDivisor.half_plane([1.0, 2.0], [(0.0, -2), ("inf", -2)])
        image = moebius_pushforward(div, MoebiusMap(0, 1, 1, 0))  # z -> 1/z
        assert image.domain == SPHERE
        assert [p.value for p in image.growth] == [1.0, 0.5]
        assert image.marked[0][0].is_infinity
        assert image.marked[1][0].value == 0
        assert [float(s) for _, s in image.marked] == [-2.0, -2.0]

    def test_pushforward_preserves_neutrality(self):
        rng = random.Random(606)
        for _ in range(20):
            div = half_plane_divisor(rng)
            image = moebius_pushforward(div, random_moebius(rng))
            assert image.charge_sum_exact() == Fraction(-2)

    def test_singular_map_rejected(self):
        with pytest.raises(DegenerateConfigurationError):
            MoebiusMap(1, 2, 2, 4)

    def test_compose_and_inverse(self):
        rng = random.Random(707)
        for _ in range(20):
            m = random_moebius(rng)
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            w = m.apply(z)
            back = m.inverse().apply(w)
            assert back.finite and back.value == pytest.approx(z, abs=1e-9)
            n = random_moebius(rng)
            both = m.compose(n).apply(z)
            seq = m.apply(n.apply(z).value)
            assert both.value == pytest.approx(seq.value, rel=1e-9)


class TestConformalDimension:
    def test_values(self):
        assert conformal_dimension(0) == 0.0
        assert conformal_dimension(-2) == 0.0
        assert conformal_dimension(1) == 3.0
        assert conformal_dimension(Charge.of("-1/2")) == pytest.approx(-0.75)

    def test_symmetric_about_minus_one(self):
        rng = random.Random(808)
        for _ in range(30):
            s = rng.uniform(-5, 5)
            assert conformal_dimension(s) == pytest.approx(
                conformal_dimension(-2.0 - s), rel=1e-12, abs=1e-12
            )


class TestLiterals:
    def test_format_complex_frozen_forms(self):
        assert format_complex(2j) == "2.0i"
        assert format_complex(-1 / 3) == "-0.3333333333333333"
        assert format_complex(0.5 + 0.25j) == "0.5+0.25i"

    def test_parse_complex_forms(self):
        assert parse_complex("i") == 1j
        assert parse_complex("-i") == -1j
        assert parse_complex("1-i") == 1 - 1j
        assert parse_complex("-0.5+2i") == -0.5 + 2j
        with pytest.raises(ValueError):
            parse_complex("nope")

    def test_parse_point_infinity(self):
        assert parse_point("inf") == INFINITY
        assert parse_point("Infinity").is_infinity

    def test_roundtrip(self):
        rng = random.Random(909)
        for _ in range(50):
            z = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
            assert parse_complex(format_complex(z)) == z

    def test_charge_literals(self):
        assert str(Charge.of("-3/2")) == "-3/2"
        assert float(Charge.of("-3/2")) == -1.5
        assert Charge.of(2).exact == Fraction(2)
        third = Charge.of("1/3")
        assert third.non_half_integer
        assert third.exact is None
        assert float(third) == pytest.approx(1 / 3)

    def test_divisor_domain_tags(self):
        assert HALF_PLANE == "half_plane"
        assert DISK == "disk"
