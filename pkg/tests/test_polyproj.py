"""Tests for linear systems, the simplex solver, projection and vertex enumeration."""

from __future__ import annotations

from fractions import Fraction

import pytest
from pydantic import ValidationError

from zchannel_regions.errors import (
    InfeasibleSystemError,
    PreconditionError,
    UnboundedRegionError,
    VariableError,
)
from zchannel_regions.models import ArithmeticMode, LinearSystemFile, Relation
from zchannel_regions.polyproj.fme import (
    elimination_counts,
    fme_eliminate,
    project,
    remove_redundant,
)
from zchannel_regions.polyproj.simplex import LPStatus, is_feasible, maximize
from zchannel_regions.polyproj.system import LinearSystem, rationalize
from zchannel_regions.polyproj.vertices import enumerate_vertices, vertex_sets_match

RATIONAL = ArithmeticMode.RATIONAL


def unit_cube(mode: ArithmeticMode = ArithmeticMode.FLOAT) -> LinearSystem:
    rows = []
    for i in range(3):
        e = [0, 0, 0]
        e[i] = 1
        rows.append((e, 1))
        rows.append(([-c for c in e], 0))
    return LinearSystem.build(("x", "y", "z"), rows, mode=mode)


# ================================================================
# Linear Systems
# ================================================================


class TestLinearSystem:
    """Construction, conversion and the JSON form."""

    def test_rationalize_fraction_strings(self) -> None:
        assert rationalize("3/7") == Fraction(3, 7)
        assert rationalize(0.5) == Fraction(1, 2)

    def test_rationalize_rejects_nan(self) -> None:
        with pytest.raises(ValueError):
            rationalize(float("nan"))

    def test_file_keeps_exact_fractions(self) -> None:
        """Rational entries survive the JSON form as fraction strings."""
        doc = LinearSystemFile.model_validate_json(
            '{"vars": ["x", "y"], "mode": "rational", "rows": [{"a": [1, "1/3"], "b": "2/7"}]}'
        )
        sys = LinearSystem.from_file(doc)
        assert sys.exact
        assert sys.rows[0].coeffs[1] == Fraction(1, 3)
        out = sys.to_file()
        assert out.rows[0].b == "2/7"
        assert out.rows[0].a == ["1", "1/3"]

    def test_row_width_mismatch_rejected(self) -> None:
        with pytest.raises(ValidationError):
            LinearSystemFile.model_validate_json(
                '{"vars": ["x", "y"], "rows": [{"a": [1], "b": 1}]}'
            )

    def test_duplicate_variables_rejected(self) -> None:
        with pytest.raises((ValidationError, VariableError)):
            LinearSystem.build(("x", "x"), [((1, 1), 1)])

    def test_equality_expands_to_two_rows(self) -> None:
        sys = LinearSystem.build(("x",), [((1,), 2, Relation.EQ, "x = 2")])
        rows = sys.inequality_rows()
        assert [(r.coeffs, r.rhs) for r in rows] == [((1.0,), 2.0), ((-1.0,), -2.0)]

    def test_unknown_variable_index(self) -> None:
        with pytest.raises(VariableError):
            unit_cube().index("w")

    def test_contains(self) -> None:
        cube = unit_cube()
        assert cube.contains((0.5, 0.5, 1.0))
        assert not cube.contains((0.5, 0.5, 1.1))


# ================================================================
# Simplex
# ================================================================


class TestSimplex:
    """Two-phase simplex in both arithmetic modes."""

    def test_exact_optimum(self) -> None:
        one, zero = Fraction(1), Fraction(0)
        rows = [((one, zero), one), ((zero, one), Fraction(2))]
        result = maximize([one, one], rows, exact=True)
        assert result.status is LPStatus.OPTIMAL
        assert result.value == Fraction(3)

    def test_float_optimum_with_negative_rhs(self) -> None:
        """A negative right-hand side needs phase 1: x >= 1, x <= 4."""
        result = maximize([1.0], [((-1.0,), -1.0), ((1.0,), 4.0)], exact=False)
        assert result.status is LPStatus.OPTIMAL
        assert result.value == pytest.approx(4.0)

    def test_infeasible(self) -> None:
        rows = [((1.0,), -1.0), ((-1.0,), -1.0)]
        assert maximize([1.0], rows, exact=False).status is LPStatus.INFEASIBLE
        assert not is_feasible(rows, 1, exact=False)

    def test_unbounded_reports_a_ray(self) -> None:
        result = maximize([1.0], [((-1.0,), 0.0)], exact=False)
        assert result.status is LPStatus.UNBOUNDED
        assert result.ray is not None and result.ray[0] > 0


# ================================================================
# Fourier-Motzkin Elimination
# ================================================================


class TestProjection:
    """Single eliminations, redundancy removal and full projections."""

    def test_eliminate_one_variable(self) -> None:
        """0 <= x <= y <= 1 projects to 0 <= x <= 1."""
        sys = LinearSystem.build(("x", "y"), [((1, -1), 0), ((0, 1), 1), ((-1, 0), 0)])
        projected = remove_redundant(fme_eliminate(sys, "y"))
        assert projected.variables == ("x",)
        assert sorted((r.coeffs, r.rhs) for r in projected.rows) == [((-1.0,), 0.0), ((1.0,), 1.0)]

    def test_redundant_row_removed(self) -> None:
        sys = LinearSystem.build(("x",), [((1,), 1), ((1,), 2), ((-1,), 0)])
        assert len(remove_redundant(sys).rows) == 2

    def test_infeasible_system_rejected(self) -> None:
        sys = LinearSystem.build(("x",), [((1,), -1), ((-1,), 0)])
        with pytest.raises(InfeasibleSystemError):
            remove_redundant(sys)

    def test_cube_projects_to_square(self) -> None:
        square = project(unit_cube(RATIONAL), ["x", "y"])
        assert square.exact
        assert len(square.rows) == 4
        assert vertex_sets_match(
            enumerate_vertices(square), [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
        )

    def test_order_is_honoured_and_checked(self) -> None:
        line = project(unit_cube(), ["x"], order=["z", "y"])
        assert enumerate_vertices(line) == [(0.0,), (1.0,)]
        with pytest.raises(VariableError):
            project(unit_cube(), ["x"], order=["z"])

    def test_unknown_keep_variable(self) -> None:
        with pytest.raises(VariableError):
            project(unit_cube(), ["w"])

    def test_elimination_counts(self) -> None:
        assert elimination_counts(unit_cube(), "y") == (1, 1)

    def test_exact_projection_of_a_skewed_simplex(self) -> None:
        """x + 3y <= 1, x, y >= 0 projected on x gives 0 <= x <= 1 exactly."""
        rows = [((1, 3), 1), ((-1, 0), 0), ((0, -1), 0)]
        sys = LinearSystem.build(("x", "y"), rows, mode=RATIONAL)
        projected = project(sys, ["x"])
        assert max(r.rhs for r in projected.rows) == Fraction(1)


# ================================================================
# Vertex Enumeration
# ================================================================


class TestVertices:
    """Vertices of small bounded polytopes."""

    def test_triangle(self) -> None:
        sys = LinearSystem.build(("x", "y"), [((1, 1), 2), ((-1, 0), 0), ((0, -1), 0)])
        assert enumerate_vertices(sys) == [(0.0, 0.0), (0.0, 2.0), (2.0, 0.0)]

    def test_duplicate_vertices_collapse(self) -> None:
        """Degenerate apex reached by several active sets is listed once."""
        sys = LinearSystem.build(
            ("x", "y"), [((1, 1), 1), ((1, 0), 1), ((0, 1), 1), ((-1, 0), 0), ((0, -1), 0)]
        )
        assert len(enumerate_vertices(sys)) == 3

    def test_exact_mode_vertices(self) -> None:
        assert len(enumerate_vertices(unit_cube(RATIONAL))) == 8

    def test_unbounded_region_names_a_direction(self) -> None:
        sys = LinearSystem.build(("x", "y"), [((-1, 0), 0), ((0, -1), 0), ((0, 1), 1)])
        with pytest.raises(UnboundedRegionError) as exc_info:
            enumerate_vertices(sys)
        assert exc_info.value.variables == ("x", "y")
        assert exc_info.value.direction[0] > 0

    def test_empty_region(self) -> None:
        sys = LinearSystem.build(("x",), [((1,), -1), ((-1,), 0)])
        with pytest.raises(InfeasibleSystemError):
            enumerate_vertices(sys)

    def test_dimension_limit(self) -> None:
        sys = LinearSystem.build(tuple("abcde"), [((1, 0, 0, 0, 0), 1)])
        with pytest.raises(PreconditionError):
            enumerate_vertices(sys)

    def test_vertex_sets_match_within_tolerance(self) -> None:
        assert vertex_sets_match([(0.0, 1.0)], [(1e-12, 1.0)])
        assert not vertex_sets_match([(0.0, 1.0)], [(0.0, 1.0), (1.0, 0.0)])
