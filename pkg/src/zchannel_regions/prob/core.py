"""Finite-alphabet probability engine.

A ``JointDistribution`` is a dense tensor over the nine Z-channel variables
(S, W, X1, U, U1, U2, X2, Y1, Y2), validated against the factorization

    p(s) p(w|s) p(x1|w,s) p(u|s) p(u1|u,s) p(u2|u,s) p(x2|u,u1,u2,s) p(y1,y2|x1,x2,s)

with deterministic encoders x1(w,s) and x2(u,u1,u2,s). Entropies and
conditional mutual informations are computed exhaustively on marginals.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import ValidationError

from zchannel_regions.errors import DistributionError, VariableError
from zchannel_regions.models import DistributionFile, Variable

logger = logging.getLogger(__name__)

AXES: tuple[Variable, ...] = tuple(Variable)
_AXIS_INDEX: dict[str, int] = {v.value: i for i, v in enumerate(AXES)}

# Factor key -> axes of the stored conditional (parents first, child axes last)
FACTOR_AXES: dict[str, tuple[Variable, ...]] = {
    "s": (Variable.S,),
    "w|s": (Variable.S, Variable.W),
    "x1|w,s": (Variable.W, Variable.S, Variable.X1),
    "u|s": (Variable.S, Variable.U),
    "u1|u,s": (Variable.U, Variable.S, Variable.U1),
    "u2|u,s": (Variable.U, Variable.S, Variable.U2),
    "x2|u,u1,u2,s": (Variable.U, Variable.U1, Variable.U2, Variable.S, Variable.X2),
    "y1,y2|x1,x2,s": (Variable.X1, Variable.X2, Variable.S, Variable.Y1, Variable.Y2),
}

# Number of child axes at the end of each factor
_FACTOR_CHILDREN: dict[str, int] = {
    "s": 1,
    "w|s": 1,
    "x1|w,s": 1,
    "u|s": 1,
    "u1|u,s": 1,
    "u2|u,s": 1,
    "x2|u,u1,u2,s": 1,
    "y1,y2|x1,x2,s": 2,
}

# s=S w=W a=X1 u=U b=U1 c=U2 d=X2 e=Y1 f=Y2
_MATERIALIZE = "s,sw,wsa,su,usb,usc,ubcsd,adsef->swaubcdef"

MAX_ALPHABET = 4

VarSet = Iterable[str | Variable] | str | Variable


# ============================================================
# Logarithm unit
# ============================================================

_natural_log: bool | None = None
_clamp_tolerance: float | None = None


def use_natural_log(enabled: bool | None) -> bool | None:
    """Switch every reported information value between nats and bits.

    Returns the previous switch so callers can restore it; None means
    "read ``use_natural_log`` from the settings on next use".
    """
    global _natural_log
    previous = _natural_log
    _natural_log = enabled
    return previous


def log_base() -> float:
    """Base of the logarithm used for all reported values (2 unless switched)."""
    global _natural_log
    if _natural_log is None:
        from zchannel_regions.config import load_settings

        _natural_log = load_settings().use_natural_log
    return math.e if _natural_log else 2.0


def to_unit(nats: float) -> float:
    """Convert a natural-log quantity to the configured unit."""
    base = log_base()
    return nats if base == math.e else nats / math.log(base)


def set_clamp_tolerance(tol: float | None) -> float | None:
    """Set the default clamp of small negative information values; returns the previous one."""
    global _clamp_tolerance
    previous = _clamp_tolerance
    _clamp_tolerance = tol
    return previous


def default_clamp_tolerance() -> float:
    global _clamp_tolerance
    if _clamp_tolerance is None:
        from zchannel_regions.config import load_settings

        _clamp_tolerance = load_settings().mi_clamp_tolerance
    return _clamp_tolerance


def clamp_negative(value: float, tol: float | None = None) -> float:
    """Report values in (-tol, 0) as 0; larger negative values pass through."""
    tol = default_clamp_tolerance() if tol is None else tol
    return 0.0 if -tol < value < 0.0 else value


# ============================================================
# Variable name handling
# ============================================================


def axes_of(names: VarSet) -> tuple[int, ...]:
    """Sorted tensor axes for a set of variable names."""
    if isinstance(names, (str, Variable)):
        names = [names]
    axes: set[int] = set()
    for name in names:
        key = name.value if isinstance(name, Variable) else str(name).upper()
        if key not in _AXIS_INDEX:
            raise VariableError(f"unknown variable {name!r}")
        axes.add(_AXIS_INDEX[key])
    return tuple(sorted(axes))


def _safe_divide(num: NDArray[np.float64], den: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.zeros(np.broadcast_shapes(num.shape, den.shape), dtype=np.float64)
    np.divide(num, den, out=out, where=np.broadcast_to(den > 0, out.shape))
    return out


# ============================================================
# JointDistribution
# ============================================================


class JointDistribution:
    """Validated, immutable probability tensor over the nine variables."""

    def __init__(
        self,
        probs: ArrayLike,
        tolerance: float = 1e-9,
        validate: bool = True,
    ) -> None:
        tensor = np.array(probs, dtype=np.float64)
        if tensor.ndim != len(AXES):
            raise DistributionError(
                "shape", f"expected {len(AXES)} axes, got {tensor.ndim}"
            )
        for axis, size in zip(AXES, tensor.shape, strict=True):
            if not 1 <= size <= MAX_ALPHABET:
                raise DistributionError(
                    "alphabet size", f"{axis.value} has {size} values (allowed 1..{MAX_ALPHABET})"
                )
        tensor.setflags(write=False)
        self._probs = tensor
        self.tolerance = tolerance
        self._entropy_cache: dict[tuple[int, ...], float] = {}
        if validate:
            self.validate()

    # --- Construction ---

    @classmethod
    def from_factors(
        cls, factors: Mapping[str, ArrayLike], tolerance: float = 1e-9
    ) -> JointDistribution:
        """Materialize the tensor from the eight conditionals."""
        missing = sorted(set(FACTOR_AXES) - set(factors))
        if missing:
            raise DistributionError("factors", f"missing factors {missing}")
        extra = sorted(set(factors) - set(FACTOR_AXES))
        if extra:
            raise DistributionError("factors", f"unknown factors {extra}")

        arrays: dict[str, NDArray[np.float64]] = {}
        sizes: dict[Variable, int] = {}
        for key, axes in FACTOR_AXES.items():
            arr = np.asarray(factors[key], dtype=np.float64)
            if arr.ndim != len(axes):
                raise DistributionError(
                    f"factor {key}", f"expected {len(axes)} axes, got {arr.ndim}"
                )
            for axis, size in zip(axes, arr.shape, strict=True):
                if sizes.setdefault(axis, size) != size:
                    raise DistributionError(
                        f"factor {key}",
                        f"{axis.value} has size {size}, elsewhere {sizes[axis]}",
                    )
            if not np.all(np.isfinite(arr)):
                raise DistributionError(f"factor {key}", "non-finite entries")
            if np.any(arr < -tolerance):
                raise DistributionError(f"factor {key}", "negative entries")
            arrays[key] = arr

        tensor = np.einsum(_MATERIALIZE, *(arrays[k] for k in FACTOR_AXES))
        return cls(tensor, tolerance=tolerance)

    # --- Accessors ---

    @property
    def probs(self) -> NDArray[np.float64]:
        return self._probs

    @property
    def alphabet_sizes(self) -> dict[str, int]:
        return {v.value: n for v, n in zip(AXES, self._probs.shape, strict=True)}

    def size(self, var: str | Variable) -> int:
        return int(self._probs.shape[axes_of(var)[0]])

    def marginal(self, names: VarSet) -> NDArray[np.float64]:
        """Marginal over ``names``, axes in canonical order."""
        return self._marginal_axes(axes_of(names))

    def _marginal_axes(self, keep: tuple[int, ...]) -> NDArray[np.float64]:
        drop = tuple(i for i in range(len(AXES)) if i not in keep)
        return np.asarray(self._probs.sum(axis=drop), dtype=np.float64)

    def conditional(self, factor: str) -> NDArray[np.float64]:
        """Reconstruct one factor of the factorization from the tensor's marginals.

        Entries whose parent configuration has zero mass are 0.
        """
        axes = FACTOR_AXES[factor]
        n_child = _FACTOR_CHILDREN[factor]
        joint_axes = tuple(_AXIS_INDEX[a.value] for a in axes)
        joint = self._marginal_axes(tuple(sorted(joint_axes)))
        # reorder from canonical order to the factor's declared order
        canonical = sorted(joint_axes)
        joint = np.transpose(joint, [canonical.index(i) for i in joint_axes])
        if n_child == len(axes):
            return joint
        parent = joint.sum(axis=tuple(range(len(axes) - n_child, len(axes))), keepdims=True)
        return _safe_divide(joint, parent)

    def factors(self) -> dict[str, NDArray[np.float64]]:
        return {key: self.conditional(key) for key in FACTOR_AXES}

    # --- Validation ---

    def factorization_residual(self) -> float:
        """Max |p - product of reconstructed conditionals|."""
        f = self.factors()
        rebuilt = np.einsum(_MATERIALIZE, *(f[k] for k in FACTOR_AXES))
        return float(np.max(np.abs(rebuilt - self._probs)))

    def validate(self) -> None:
        tol = self.tolerance
        p = self._probs
        if not np.all(np.isfinite(p)):
            raise DistributionError("finite", "tensor has NaN or inf entries")
        most_negative = float(p.min())
        if most_negative < -tol:
            raise DistributionError("nonnegative", f"entry {most_negative:.3g} < 0")
        total = float(p.sum())
        if abs(total - 1.0) > tol:
            raise DistributionError(
                f"mass {total:.12g}", f"tensor must sum to 1 within {tol:g}"
            )
        residual = self.factorization_residual()
        if residual > tol:
            raise DistributionError(
                "factorization", f"residual {residual:.3e} exceeds {tol:g}"
            )
        for key in ("x1|w,s", "x2|u,u1,u2,s"):
            cond = self.conditional(key)
            parent_mass = self._parent_mass(key)
            support = np.broadcast_to(parent_mass > tol, cond.shape)
            off = np.minimum(np.abs(cond), np.abs(cond - 1.0))[support]
            if off.size and float(off.max()) > tol:
                raise DistributionError(
                    "determinism",
                    f"p({key}) has entry {float(off.max()):.3g} away from {{0, 1}}",
                )

    def _parent_mass(self, factor: str) -> NDArray[np.float64]:
        axes = FACTOR_AXES[factor]
        n_child = _FACTOR_CHILDREN[factor]
        joint_axes = tuple(_AXIS_INDEX[a.value] for a in axes)
        canonical = sorted(joint_axes)
        joint = np.transpose(
            self._marginal_axes(tuple(canonical)), [canonical.index(i) for i in joint_axes]
        )
        return np.asarray(
            joint.sum(axis=tuple(range(len(axes) - n_child, len(axes))), keepdims=True)
        )

    # --- Entropy ---

    def entropy_of_axes(self, axes: tuple[int, ...]) -> float:
        """Joint entropy in nats of the given (sorted) axes; 0 for the empty set."""
        if not axes:
            return 0.0
        cached = self._entropy_cache.get(axes)
        if cached is not None:
            return cached
        m = self._marginal_axes(axes).ravel()
        m = m[m > 0]
        value = float(-np.sum(m * np.log(m)))
        self._entropy_cache[axes] = value
        return value

    # --- Serialization ---

    def to_file(self) -> DistributionFile:
        return DistributionFile(
            alphabets=self.alphabet_sizes,
            factors={k: v.tolist() for k, v in self.factors().items()},
            tolerance=self.tolerance,
        )

    def __repr__(self) -> str:
        sizes = ",".join(f"{k}={v}" for k, v in self.alphabet_sizes.items())
        return f"JointDistribution({sizes})"


# ============================================================
# Information measures
# ============================================================


def entropy(dist: JointDistribution, names: VarSet) -> float:
    """H(names) with the 0 log 0 = 0 convention."""
    axes = axes_of(names)
    if not axes:
        raise VariableError("entropy needs at least one variable")
    return to_unit(dist.entropy_of_axes(axes))


def conditional_entropy(dist: JointDistribution, names: VarSet, given: VarSet = ()) -> float:
    a = axes_of(names)
    c = axes_of(given)
    joint = tuple(sorted(set(a) | set(c)))
    return to_unit(dist.entropy_of_axes(joint) - dist.entropy_of_axes(c))


def conditional_mutual_information(
    dist: JointDistribution,
    a: VarSet,
    b: VarSet,
    c: VarSet = (),
    clamp_tolerance: float | None = None,
) -> float:
    """I(a; b | c) = H(a|c) + H(b|c) - H(ab|c).

    Values in (-clamp_tolerance, 0) are reported as 0; the default clamp is
    ``mi_clamp_tolerance`` unless ``set_clamp_tolerance`` changed it.
    """
    ax, bx, cx = axes_of(a), axes_of(b), axes_of(c)
    if not ax or not bx:
        raise VariableError("mutual information needs nonempty a and b")
    sa, sb, sc = set(ax), set(bx), set(cx)
    if sa & sb or sa & sc or sb & sc:
        overlap = sorted(AXES[i].value for i in (sa & sb) | (sa & sc) | (sb & sc))
        raise VariableError(f"variable sets overlap on {overlap}")
    h = dist.entropy_of_axes
    nats = (
        h(tuple(sorted(sa | sc)))
        + h(tuple(sorted(sb | sc)))
        - h(tuple(sorted(sa | sb | sc)))
        - h(cx)
    )
    return clamp_negative(to_unit(nats), clamp_tolerance)


def mutual_information(dist: JointDistribution, a: VarSet, b: VarSet) -> float:
    return conditional_mutual_information(dist, a, b, ())


# ============================================================
# Generators and file I/O
# ============================================================


def _one_hot_map(
    rng: np.random.Generator, parent_shape: tuple[int, ...], n_out: int
) -> NDArray[np.float64]:
    """Uniformly random deterministic map from parent configurations to outputs."""
    choice = rng.integers(0, n_out, size=parent_shape)
    return np.asarray(np.eye(n_out)[choice], dtype=np.float64)


def random_joint_distribution(
    seed: int,
    alphabet_sizes: Mapping[str, int] | None = None,
    *,
    identity_u1: bool = False,
    degraded: bool = False,
    tolerance: float = 1e-9,
) -> JointDistribution:
    """Random distribution respecting the factorization.

    Each stochastic conditional is a uniform draw from its simplex; x1 and x2
    are uniformly random deterministic maps. ``identity_u1`` forces U1 = U,
    ``degraded`` draws the channel as p(y2|x2,s) p(y1|x1,y2,s).
    """
    sizes = {v.value: 2 for v in AXES}
    for name, n in (alphabet_sizes or {}).items():
        key = name.value if isinstance(name, Variable) else str(name).upper()
        if key not in sizes:
            raise VariableError(f"unknown variable {name!r}")
        sizes[key] = int(n)
    for name, n in sizes.items():
        if not 1 <= n <= MAX_ALPHABET:
            raise DistributionError(
                "alphabet size", f"{name} has {n} values (allowed 1..{MAX_ALPHABET})"
            )
    if identity_u1:
        sizes["U1"] = sizes["U"]

    n = sizes
    rng = np.random.default_rng(seed)

    def simplex(parents: tuple[int, ...], k: int) -> NDArray[np.float64]:
        return np.asarray(rng.dirichlet(np.ones(k), size=parents), dtype=np.float64)

    factors: dict[str, NDArray[np.float64]] = {
        "s": np.asarray(rng.dirichlet(np.ones(n["S"])), dtype=np.float64),
        "w|s": simplex((n["S"],), n["W"]),
        "x1|w,s": _one_hot_map(rng, (n["W"], n["S"]), n["X1"]),
        "u|s": simplex((n["S"],), n["U"]),
    }
    if identity_u1:
        eye = np.eye(n["U"])
        factors["u1|u,s"] = np.repeat(eye[:, None, :], n["S"], axis=1)
    else:
        factors["u1|u,s"] = simplex((n["U"], n["S"]), n["U1"])
    factors["u2|u,s"] = simplex((n["U"], n["S"]), n["U2"])
    factors["x2|u,u1,u2,s"] = _one_hot_map(rng, (n["U"], n["U1"], n["U2"], n["S"]), n["X2"])

    if degraded:
        p_y2 = simplex((n["X2"], n["S"]), n["Y2"])  # (X2, S, Y2)
        p_y1 = simplex((n["X1"], n["Y2"], n["S"]), n["Y1"])  # (X1, Y2, S, Y1)
        factors["y1,y2|x1,x2,s"] = np.einsum("dsf,afse->adsef", p_y2, p_y1)
    else:
        flat = simplex((n["X1"], n["X2"], n["S"]), n["Y1"] * n["Y2"])
        factors["y1,y2|x1,x2,s"] = flat.reshape(n["X1"], n["X2"], n["S"], n["Y1"], n["Y2"])

    return JointDistribution.from_factors(factors, tolerance=tolerance)


def point_mass_distribution(tolerance: float = 1e-9) -> JointDistribution:
    """All nine variables constant."""
    return JointDistribution(np.ones((1,) * len(AXES)), tolerance=tolerance)


def distribution_from_file(doc: DistributionFile, tolerance: float = 1e-9) -> JointDistribution:
    tol = doc.tolerance if doc.tolerance is not None else tolerance
    dist = JointDistribution.from_factors(doc.factors, tolerance=tol)
    if doc.alphabets != dist.alphabet_sizes:
        raise DistributionError(
            "alphabets", f"declared {doc.alphabets} but factors give {dist.alphabet_sizes}"
        )
    return dist


def load_distribution(path: str | Path, tolerance: float = 1e-9) -> JointDistribution:
    """Load and validate a JointDistribution JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = DistributionFile.model_validate_json(text)
    except ValidationError as exc:
        raise DistributionError("file format", str(exc)) from exc
    dist = distribution_from_file(doc, tolerance=tolerance)
    logger.info("Loaded distribution %s from %s", dist, path)
    return dist


def save_distribution(dist: JointDistribution, path: str | Path) -> None:
    payload: dict[str, Any] = dist.to_file().model_dump()
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
