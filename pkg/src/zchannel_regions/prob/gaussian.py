"""Exact mutual information for zero-mean jointly Gaussian variables.

I(a; b | c) = 1/2 log( det S_{a|c} det S_{b|c} / det S_{ab|c} ), where
S_{x|c} is the Schur complement of the covariance restricted to x given c.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from zchannel_regions.errors import GaussianNumericalError, VariableError
from zchannel_regions.prob.core import clamp_negative, to_unit

logger = logging.getLogger(__name__)


class CovarianceModel:
    """Named, symmetric positive-semidefinite covariance matrix (zero mean).

    Matrices whose most negative eigenvalue lies within ``psd_tolerance`` of 0
    are repaired by clamping eigenvalues at 0; anything worse is rejected.
    """

    def __init__(
        self,
        names: Sequence[str],
        matrix: ArrayLike,
        psd_tolerance: float = 1e-10,
        symmetry_tolerance: float = 1e-12,
    ) -> None:
        sigma = np.array(matrix, dtype=np.float64)
        n = len(names)
        if len(set(names)) != n:
            raise VariableError(f"duplicate variable names in {list(names)}")
        if sigma.shape != (n, n):
            raise GaussianNumericalError(
                "covariance", math.nan, f"shape {sigma.shape} does not match {n} names"
            )
        if not np.all(np.isfinite(sigma)):
            raise GaussianNumericalError("covariance", math.nan, "non-finite entries")
        scale = max(1.0, float(np.max(np.abs(sigma)))) if n else 1.0
        asym = float(np.max(np.abs(sigma - sigma.T))) if n else 0.0
        if asym > symmetry_tolerance * scale:
            raise GaussianNumericalError(
                "covariance", math.nan, f"asymmetry {asym:.3e} exceeds tolerance"
            )
        sigma = 0.5 * (sigma + sigma.T)
        if n:
            eigvals, eigvecs = np.linalg.eigh(sigma)
            lowest = float(eigvals[0])
            if lowest < -psd_tolerance * scale:
                raise GaussianNumericalError(
                    "covariance",
                    _condition(eigvals),
                    f"eigenvalue {lowest:.3e} below -{psd_tolerance:g}",
                )
            if lowest < 0.0:
                logger.debug("Repairing covariance: clamping eigenvalue %.3e to 0", lowest)
                sigma = (eigvecs * np.clip(eigvals, 0.0, None)) @ eigvecs.T
                sigma = 0.5 * (sigma + sigma.T)
        sigma.setflags(write=False)
        self.names: tuple[str, ...] = tuple(names)
        self._index = {name: i for i, name in enumerate(self.names)}
        self.matrix: NDArray[np.float64] = sigma

    @classmethod
    def from_linear(
        cls,
        base_variances: Mapping[str, float],
        derived: Mapping[str, Mapping[str, float]],
        psd_tolerance: float = 1e-10,
    ) -> CovarianceModel:
        """Model of independent base variables plus linear combinations of them.

        Sigma = L diag(v) L^T, with one row of L per variable (base rows are unit
        vectors, derived rows carry the given coefficients).
        """
        base = list(base_variances)
        for name, var in base_variances.items():
            if var < 0 or not math.isfinite(var):
                raise GaussianNumericalError(name, math.nan, f"invalid variance {var}")
        rows: list[NDArray[np.float64]] = [np.eye(len(base))[i] for i in range(len(base))]
        for name, coefs in derived.items():
            row = np.zeros(len(base))
            for b, coef in coefs.items():
                if b not in base_variances:
                    raise VariableError(f"{name} refers to unknown base variable {b!r}")
                row[base.index(b)] = coef
            rows.append(row)
        loading = np.vstack(rows)
        sigma = loading @ np.diag([base_variances[b] for b in base]) @ loading.T
        return cls([*base, *derived], sigma, psd_tolerance=psd_tolerance)

    def indices(self, names: Iterable[str]) -> list[int]:
        out = []
        for name in names:
            if name not in self._index:
                raise VariableError(f"unknown variable {name!r}")
            out.append(self._index[name])
        return out

    def submatrix(
        self, rows: Iterable[str], cols: Iterable[str] | None = None
    ) -> NDArray[np.float64]:
        r = self.indices(rows)
        c = r if cols is None else self.indices(cols)
        return np.asarray(self.matrix[np.ix_(r, c)], dtype=np.float64)

    def variance(self, name: str) -> float:
        i = self.indices([name])[0]
        return float(self.matrix[i, i])

    def covariance(self, a: str, b: str) -> float:
        i, j = self.indices([a, b])
        return float(self.matrix[i, j])


def _condition(eigvals: NDArray[np.float64]) -> float:
    lo, hi = float(np.min(eigvals)), float(np.max(np.abs(eigvals)))
    return math.inf if lo <= 0.0 else hi / lo


def _as_list(names: Iterable[str] | str) -> list[str]:
    return [names] if isinstance(names, str) else list(names)


def _logdet_psd(matrix: NDArray[np.float64], label: str) -> float:
    if matrix.size == 0:
        return 0.0
    sym = 0.5 * (matrix + matrix.T)
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        eigvals = np.linalg.eigvalsh(sym)
        raise GaussianNumericalError(
            label, _condition(eigvals), "singular conditional covariance"
        ) from exc
    return float(2.0 * np.sum(np.log(np.diag(chol))))


def conditional_covariance(
    model: CovarianceModel,
    target: Sequence[str],
    given: Sequence[str],
    jitter: float = 1e-12,
) -> NDArray[np.float64]:
    """Schur complement Sigma_tt - Sigma_tg Sigma_gg^{-1} Sigma_gt (jittered diagonal)."""
    s_tt = model.submatrix(target) + jitter * np.eye(len(target))
    if not given:
        return s_tt
    s_gg = model.submatrix(given) + jitter * np.eye(len(given))
    s_tg = model.submatrix(target, given)
    try:
        solved = np.linalg.solve(s_gg, s_tg.T)
    except np.linalg.LinAlgError as exc:
        raise GaussianNumericalError(
            f"Sigma[{','.join(given)}]", float(np.linalg.cond(s_gg)), str(exc)
        ) from exc
    return np.asarray(s_tt - s_tg @ solved, dtype=np.float64)


def gaussian_mutual_information(
    model: CovarianceModel,
    a: Iterable[str] | str,
    b: Iterable[str] | str,
    c: Iterable[str] | str = (),
    jitter: float = 1e-12,
    clamp_tolerance: float | None = None,
) -> float:
    """I(a; b | c) for the jointly Gaussian model, in the configured unit."""
    la, lb, lc = _as_list(a), _as_list(b), _as_list(c)
    if not la or not lb:
        raise VariableError("mutual information needs nonempty a and b")
    sa, sb, sc = set(la), set(lb), set(lc)
    if sa & sb or sa & sc or sb & sc:
        overlap = sorted((sa & sb) | (sa & sc) | (sb & sc))
        raise VariableError(f"variable sets overlap on {overlap}")
    model.indices([*la, *lb, *lc])

    cond_ab = conditional_covariance(model, [*la, *lb], lc, jitter)
    na = len(la)
    nats = 0.5 * (
        _logdet_psd(cond_ab[:na, :na], f"Sigma[{','.join(la)}|{','.join(lc)}]")
        + _logdet_psd(cond_ab[na:, na:], f"Sigma[{','.join(lb)}|{','.join(lc)}]")
        - _logdet_psd(cond_ab, f"Sigma[{','.join(la + lb)}|{','.join(lc)}]")
    )
    return clamp_negative(to_unit(nats), clamp_tolerance)

