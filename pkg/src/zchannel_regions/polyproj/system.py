"""Named-variable linear inequality systems in float or exact-rational arithmetic."""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

from zchannel_regions.errors import VariableError
from zchannel_regions.models import ArithmeticMode, LinearSystemFile, Relation, SystemRow

Number = Fraction | float
Scalar = int | float | str | Fraction


def rationalize(value: Scalar, limit_denominator: int = 10**12) -> Fraction:
    """Exact value for ints, fraction strings and Fractions; closest bounded fraction for floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if not math.isfinite(value):
        raise ValueError(f"cannot rationalize {value}")
    return Fraction(value).limit_denominator(limit_denominator)


def _to_float(value: Scalar) -> float:
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    return float(value)


@dataclass(frozen=True)
class Row:
    """``coeffs . x (<= | =) rhs``."""

    coeffs: tuple[Number, ...]
    rhs: Number
    rel: Relation = Relation.LE
    label: str = ""

    def is_trivial(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def evaluate(self, point: Sequence[Number]) -> Number:
        total: Number = 0
        for c, x in zip(self.coeffs, point, strict=True):
            total += c * x
        return total


@dataclass(frozen=True)
class LinearSystem:
    """Ordered variables plus rows; equalities stay single rows until expanded."""

    variables: tuple[str, ...]
    rows: tuple[Row, ...] = ()
    mode: ArithmeticMode = ArithmeticMode.FLOAT
    _index: dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.variables)) != len(self.variables):
            raise VariableError(f"duplicate variables in {self.variables}")
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.variables)})
        n = len(self.variables)
        for i, row in enumerate(self.rows):
            if len(row.coeffs) != n:
                raise ValueError(f"row {i} has {len(row.coeffs)} coefficients for {n} variables")
            if self.mode is ArithmeticMode.FLOAT:
                if not all(math.isfinite(float(c)) for c in (*row.coeffs, row.rhs)):
                    raise ValueError(f"row {i} has NaN or inf entries")
            elif not all(isinstance(c, Fraction) for c in (*row.coeffs, row.rhs)):
                raise ValueError(f"row {i} is not rational in rational mode")

    # --- Construction ---

    @classmethod
    def build(
        cls,
        variables: Sequence[str],
        rows: Iterable[Sequence[Any]],
        mode: ArithmeticMode = ArithmeticMode.FLOAT,
        limit_denominator: int = 10**12,
    ) -> LinearSystem:
        """Build from ``(coeffs, rhs[, rel, label])`` tuples, converting numbers to ``mode``."""
        conv = cls._converter(mode, limit_denominator)
        built = []
        for entry in rows:
            coeffs, rhs, *rest = entry
            rel = rest[0] if rest else Relation.LE
            label = rest[1] if len(rest) > 1 else ""
            built.append(Row(tuple(conv(c) for c in coeffs), conv(rhs), Relation(rel), str(label)))
        return cls(tuple(variables), tuple(built), mode)

    @staticmethod
    def _converter(
        mode: ArithmeticMode, limit_denominator: int
    ) -> Callable[[Scalar], Number]:
        if mode is ArithmeticMode.RATIONAL:
            return lambda v: rationalize(v, limit_denominator)
        return _to_float

    @classmethod
    def from_file(cls, doc: LinearSystemFile, limit_denominator: int = 10**12) -> LinearSystem:
        return cls.build(
            doc.vars,
            [(r.a, r.b, r.rel, r.label) for r in doc.rows],
            mode=doc.mode,
            limit_denominator=limit_denominator,
        )

    def to_file(self) -> LinearSystemFile:
        def out(v: Number) -> int | float | str:
            if isinstance(v, Fraction):
                return str(v.numerator) if v.denominator == 1 else str(v)
            return float(v)

        return LinearSystemFile(
            vars=list(self.variables),
            rows=[
                SystemRow(a=[out(c) for c in r.coeffs], rel=r.rel, b=out(r.rhs), label=r.label)
                for r in self.rows
            ],
            mode=self.mode,
        )

    # --- Conversions ---

    def to_rational(self, limit_denominator: int = 10**12) -> LinearSystem:
        if self.mode is ArithmeticMode.RATIONAL:
            return self
        return LinearSystem.build(
            self.variables,
            [(r.coeffs, r.rhs, r.rel, r.label) for r in self.rows],
            mode=ArithmeticMode.RATIONAL,
            limit_denominator=limit_denominator,
        )

    def to_float(self) -> LinearSystem:
        if self.mode is ArithmeticMode.FLOAT:
            return self
        return LinearSystem.build(
            self.variables,
            [(r.coeffs, r.rhs, r.rel, r.label) for r in self.rows],
            mode=ArithmeticMode.FLOAT,
        )

    # --- Accessors ---

    @property
    def exact(self) -> bool:
        return self.mode is ArithmeticMode.RATIONAL

    def zero(self) -> Number:
        return Fraction(0) if self.exact else 0.0

    def index(self, var: str) -> int:
        if var not in self._index:
            raise VariableError(f"unknown variable {var!r}; system has {list(self.variables)}")
        return self._index[var]

    def __len__(self) -> int:
        return len(self.rows)

    def with_rows(self, rows: Iterable[Row]) -> LinearSystem:
        return replace(self, rows=tuple(rows))

    def inequality_rows(self) -> list[Row]:
        """Rows as ``<=`` only; each equality becomes the pair a.x <= b, -a.x <= -b."""
        out: list[Row] = []
        for row in self.rows:
            if row.rel is Relation.EQ:
                out.append(Row(row.coeffs, row.rhs, Relation.LE, row.label))
                out.append(
                    Row(tuple(-c for c in row.coeffs), -row.rhs, Relation.LE, row.label)
                )
            else:
                out.append(row)
        return out

    def expanded(self) -> LinearSystem:
        return self.with_rows(self.inequality_rows())

    def contains(self, point: Sequence[Number], tol: float = 0.0) -> bool:
        """Whether ``point`` satisfies every row (within ``tol``)."""
        for row in self.rows:
            lhs = row.evaluate(point)
            if row.rel is Relation.EQ:
                if abs(lhs - row.rhs) > tol:
                    return False
            elif lhs > row.rhs + tol:
                return False
        return True

    def describe(self) -> str:
        lines = []
        for row in self.rows:
            terms = [
                f"{c}*{v}" for c, v in zip(row.coeffs, self.variables, strict=True) if c != 0
            ]
            lhs = " + ".join(terms) or "0"
            tag = f"  [{row.label}]" if row.label else ""
            lines.append(f"{lhs} {row.rel.value} {row.rhs}{tag}")
        return "\n".join(lines)
