"""Tests for the Gaussian Z channel and its dirty-paper-coding regions."""

from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from zchannel_regions.errors import ChannelError
from zchannel_regions.gauss.channel import GaussianZChannel, as_raw, load_channel, standardize
from zchannel_regions.gauss.dpc import (
    BOUND_COLUMNS,
    DpcParams,
    build_covariance,
    costa_coefficients,
    determinant_crosscheck,
    dpc_bounds,
    dpc_region,
    dpc_region_union,
    hull_contains,
    lemma1_residuals,
    linear_grid,
    logdet_bounds,
    q_invariance,
    sweep_rows,
)
from zchannel_regions.models import RawChannelSpec

# ================================================================
# Channel Model
# ================================================================


class TestChannel:
    """Raw and standard forms of the channel."""

    def test_standardize_unit_gains(self) -> None:
        raw = RawChannelSpec(
            a11=1.0, a21=1.0, a22=1.0, N1=1.0, N2=1.0, Q=1.0, P1star=2.0, P2star=3.0
        )
        ch = standardize(raw)
        assert (ch.a, ch.a1, ch.a2) == pytest.approx((1.0, 2.0, 1.0))
        assert (ch.P1, ch.P2, ch.Q) == pytest.approx((2.0, 3.0, 1.0))

    def test_standardize_scales_noise(self) -> None:
        raw = RawChannelSpec(
            a11=1.0, a21=2.0, a22=1.0, N1=4.0, N2=1.0, Q=0.5, P1star=4.0, P2star=1.0
        )
        ch = standardize(raw)
        assert ch.a == pytest.approx(1.0)
        assert ch.a1 == pytest.approx(1.5)
        assert ch.P1 == pytest.approx(1.0)

    def test_zero_cross_gain_rejected(self) -> None:
        raw = RawChannelSpec(
            a11=1.0, a21=1.0, a22=0.0, N1=1.0, N2=1.0, Q=1.0, P1star=1.0, P2star=1.0
        )
        with pytest.raises(ChannelError):
            standardize(raw)

    def test_raw_round_trip(self) -> None:
        ch = GaussianZChannel(a=0.5, a1=2.0, a2=1.5, P1=2.0, P2=3.0, Q=1.0)
        back = standardize(as_raw(ch))
        assert (back.a, back.a1, back.a2, back.P1, back.P2) == pytest.approx(
            (ch.a, ch.a1, ch.a2, ch.P1, ch.P2)
        )

    def test_negative_power_rejected(self) -> None:
        with pytest.raises(ChannelError):
            GaussianZChannel(a=1.0, a1=1.0, a2=1.0, P1=-1.0, P2=1.0, Q=1.0)

    def test_load_raw_channel(self, tmp_path: Path) -> None:
        path = tmp_path / "raw.json"
        raw = {"form": "raw", "a11": 1.0, "a21": 1.0, "a22": 1.0, "N1": 1.0, "N2": 1.0,
               "Q": 1.0, "P1star": 1.0, "P2star": 1.0}
        path.write_text(json.dumps(raw), encoding="utf-8")
        assert load_channel(path).a1 == pytest.approx(2.0)

    def test_load_rejects_zero_noise(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.json"
        bad = {"form": "raw", "a11": 1.0, "a21": 1.0, "a22": 1.0, "N1": 0.0, "N2": 1.0,
               "Q": 1.0, "P1star": 1.0, "P2star": 1.0}
        path.write_text(json.dumps(bad), encoding="utf-8")
        with pytest.raises(ChannelError):
            load_channel(path)


# ================================================================
# Costa Coefficients and the Covariance Model
# ================================================================


class TestCoefficients:
    """Interference-cancelling coefficients and the derived covariances."""

    def test_reference_values(self, reference_channel: GaussianZChannel) -> None:
        alpha, beta = costa_coefficients(reference_channel, 1.0)
        assert alpha == pytest.approx(math.sqrt(3.0) / 6.0)
        assert beta == pytest.approx(math.sqrt(2.0) / 6.0)

    def test_no_common_power_means_no_alpha(self, reference_channel: GaussianZChannel) -> None:
        alpha, _ = costa_coefficients(reference_channel, 0.0)
        assert alpha == 0.0

    def test_split_outside_unit_interval(self, reference_channel: GaussianZChannel) -> None:
        with pytest.raises(ChannelError):
            DpcParams.costa(reference_channel, 1.5)

    def test_covariances(self, reference_channel: GaussianZChannel) -> None:
        params = DpcParams.costa(reference_channel, 0.4, gamma=0.3)
        model = build_covariance(reference_channel, params)
        assert model.variance("Y2") == pytest.approx(3.0 + 1.0 + 1.0)
        assert model.variance("X2") == pytest.approx(3.0)
        assert model.covariance("U", "S") == pytest.approx(params.alpha)
        assert model.covariance("U2", "S") == pytest.approx(0.3)


# ================================================================
# Orthogonality Residuals
# ================================================================


class TestLemma1:
    """Costa coefficients make the first receiver ignore the state."""

    @pytest.mark.parametrize("xi", [0.0, 0.3, 1.0])
    def test_costa_coefficients_pass(
        self, reference_channel: GaussianZChannel, xi: float
    ) -> None:
        res = lemma1_residuals(reference_channel, DpcParams.costa(reference_channel, xi))
        assert res.passes()

    def test_perturbation_is_detected(self, reference_channel: GaussianZChannel) -> None:
        params = DpcParams.costa(reference_channel, 1.0).perturbed(0.1)
        res = lemma1_residuals(reference_channel, params)
        assert abs(res.r_u) > 1e-3
        assert res.mi_gaps[0] > 1e-6
        assert not res.passes()

    def test_no_interference_no_gap(self, reference_channel: GaussianZChannel) -> None:
        quiet = reference_channel.with_q(0.0)
        res = lemma1_residuals(quiet, DpcParams.costa(quiet, 1.0).perturbed(0.1))
        assert max(res.mi_gaps) <= 1e-9

    def test_state_must_reach_first_receiver(self) -> None:
        ch = GaussianZChannel(a=1.0, a1=0.0, a2=1.0, P1=1.0, P2=1.0, Q=1.0)
        with pytest.raises(ChannelError):
            lemma1_residuals(ch, DpcParams(0.5, 0.0, 0.0))


# ================================================================
# Region Bounds
# ================================================================


class TestDpcBounds:
    """Closed-form bounds against hand values and the log-det path."""

    def test_hand_values(self, unit_channel: GaussianZChannel) -> None:
        b = dpc_bounds(unit_channel, DpcParams.costa(unit_channel, 1.0))
        assert b.r11 == pytest.approx(0.5)
        assert b.r21 == pytest.approx(0.5)
        assert b.r11_r21 == pytest.approx(math.log2(3.0) / 2.0)

    def test_no_common_power_no_common_rate(self, unit_channel: GaussianZChannel) -> None:
        region = dpc_region(unit_channel, DpcParams.costa(unit_channel, 0.0))
        assert region.rhs("R21 <= common message at receiver 1") == pytest.approx(0.0)

    def test_forms_agree_when_gamma_equals_alpha(self, unit_channel: GaussianZChannel) -> None:
        alpha, beta = costa_coefficients(unit_channel, 0.6)
        b = dpc_bounds(unit_channel, DpcParams(0.6, alpha, beta, gamma=alpha))
        assert b.r21_r22 == pytest.approx(b.r21_r22_corrected)
        assert b.r22 == pytest.approx(b.r22_corrected)

    @pytest.mark.parametrize(("xi", "gamma"), [(0.2, -1.0), (0.5, 0.0), (0.9, 1.5)])
    def test_corrected_form_matches_logdet(
        self, reference_channel: GaussianZChannel, xi: float, gamma: float
    ) -> None:
        params = DpcParams.costa(reference_channel, xi, gamma)
        b = dpc_bounds(reference_channel, params)
        ref = logdet_bounds(reference_channel, params)
        corrected = b.values(corrected=True)
        for got, want in zip(corrected, ref, strict=True):
            assert got == pytest.approx(want, abs=1e-9)

    def test_determinant_crosscheck(self, unit_channel: GaussianZChannel) -> None:
        report = determinant_crosscheck(
            unit_channel, linear_grid(5, 0.0, 1.0), linear_grid(5, -2.0, 2.0)
        )
        assert report.corrected_agrees
        assert not report.literal_agrees
        assert report.points + report.skipped == 25

    def test_q_invariance(self, reference_channel: GaussianZChannel) -> None:
        report = q_invariance(reference_channel, linear_grid(5, 0.0, 1.0))
        assert report.passed
        assert report.to_dict()["passed"] is True


# ================================================================
# Sweeps and the Union
# ================================================================


class TestSweeps:
    """Grid sweeps and the convex hull of the union."""

    def test_sweep_rows(self, unit_channel: GaussianZChannel) -> None:
        rows = sweep_rows(unit_channel, linear_grid(3, 0.0, 1.0), [-1.0, 1.0])
        assert len(rows) == 6
        assert set(rows[0]) == {"xi", "gamma", *BOUND_COLUMNS, "r21_r22_corrected",
                                "r22_corrected"}

    def test_linear_grid(self) -> None:
        assert linear_grid(1, 0.3, 1.0) == [0.3]
        assert linear_grid(3, 0.0, 1.0) == [0.0, 0.5, 1.0]
        with pytest.raises(ChannelError):
            linear_grid(0, 0.0, 1.0)

    def test_hull_contains_every_region(self, unit_channel: GaussianZChannel) -> None:
        union = dpc_region_union(unit_channel, linear_grid(3, 0.0, 1.0), [0.0, 1.0])
        assert len(union.points) == 6
        assert union.hull_equations
        for _, _, region in union.points:
            assert hull_contains(union.hull_equations, region.vertices(), tol=1e-7)

    def test_refinement_never_shrinks(self, unit_channel: GaussianZChannel) -> None:
        coarse = dpc_region_union(unit_channel, linear_grid(3, 0.0, 1.0), [0.0])
        fine = dpc_region_union(unit_channel, linear_grid(5, 0.0, 1.0), [0.0])
        assert hull_contains(fine.hull_equations, coarse.hull_vertices, tol=1e-7)

    def test_empty_grid_rejected(self, unit_channel: GaussianZChannel) -> None:
        with pytest.raises(ChannelError):
            dpc_region_union(unit_channel, [], [0.0])
