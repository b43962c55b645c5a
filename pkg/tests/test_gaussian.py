"""Tests for covariance models and Gaussian mutual information."""

from __future__ import annotations

import math

import pytest

from zchannel_regions.errors import GaussianNumericalError, VariableError
from zchannel_regions.prob.core import use_natural_log
from zchannel_regions.prob.gaussian import (
    CovarianceModel,
    conditional_covariance,
    gaussian_mutual_information,
)


def awgn(power: float) -> CovarianceModel:
    """Y = X + Z with Var X = power, Var Z = 1."""
    return CovarianceModel.from_linear({"X": power, "Z": 1.0}, {"Y": {"X": 1.0, "Z": 1.0}})


class TestCovarianceModel:
    """Construction and repair of covariance matrices."""

    def test_linear_model_entries(self) -> None:
        model = awgn(3.0)
        assert model.variance("Y") == pytest.approx(4.0)
        assert model.covariance("X", "Y") == pytest.approx(3.0)

    def test_tiny_negative_eigenvalue_repaired(self) -> None:
        model = CovarianceModel(["a", "b"], [[1.0, 1.0], [1.0, 1.0 - 1e-12]])
        assert model.variance("a") == pytest.approx(1.0)

    def test_indefinite_matrix_rejected(self) -> None:
        with pytest.raises(GaussianNumericalError):
            CovarianceModel(["a", "b"], [[1.0, 2.0], [2.0, 1.0]])

    def test_asymmetric_matrix_rejected(self) -> None:
        with pytest.raises(GaussianNumericalError, match="asymmetry"):
            CovarianceModel(["a", "b"], [[1.0, 0.5], [0.4, 1.0]])

    def test_unknown_base_variable(self) -> None:
        with pytest.raises(VariableError):
            CovarianceModel.from_linear({"X": 1.0}, {"Y": {"V": 1.0}})

    def test_conditional_covariance_is_schur_complement(self) -> None:
        cond = conditional_covariance(awgn(3.0), ["X"], ["Y"], jitter=0.0)
        assert float(cond[0, 0]) == pytest.approx(3.0 / 4.0)


class TestGaussianMutualInformation:
    """Log-det mutual informations."""

    def test_awgn_capacity(self) -> None:
        assert gaussian_mutual_information(awgn(3.0), "X", "Y") == pytest.approx(1.0)

    def test_nats(self) -> None:
        use_natural_log(True)
        assert gaussian_mutual_information(awgn(3.0), "X", "Y") == pytest.approx(math.log(2.0))

    def test_independent_variables(self) -> None:
        assert gaussian_mutual_information(awgn(1.0), "X", "Z") == pytest.approx(0.0, abs=1e-12)

    def test_conditioning_on_noise_helps(self) -> None:
        """Knowing Z leaves X observed up to jitter, so I(X; Y | Z) is large."""
        model = awgn(1.0)
        assert gaussian_mutual_information(model, "X", "Y", "Z") > 5.0

    def test_overlap_rejected(self) -> None:
        with pytest.raises(VariableError, match="overlap"):
            gaussian_mutual_information(awgn(1.0), ["X", "Z"], "Y", "Z")

    def test_unknown_variable(self) -> None:
        with pytest.raises(VariableError):
            gaussian_mutual_information(awgn(1.0), "X", "W")
