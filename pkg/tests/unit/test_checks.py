"""Unit tests for loop checks."""

import pytest

from hpcforge.ompdata.checks import (
    CLAUSE_CONFLICT,
    EARLY_EXIT,
    NON_CANONICAL,
    analyze_loop,
    check_loop,
    induction_variable,
)
from hpcforge.parsing.sites import for_loops
from hpcforge.parsing.source import Language, parse_source


def analysis_of(code: str):
    tree = parse_source(code, Language.C)
    return analyze_loop(tree, for_loops(tree)[0])


class TestInductionVariable:
    """Test canonical header detection."""

    @pytest.mark.parametrize("header", [
        "for (i = 0; i < n; i++)",
        "for (int i = 0; i <= n; ++i)",
        "for (i = n; i > 0; i--)",
        "for (i = 0; i < n; i += 2)",
        "for (i = 0; i != n; i = i + 1)",
    ])
    def test_canonical_headers(self, header):
        """Test supported header shapes."""
        tree = parse_source(header + " a[i] = 0;", Language.C)
        assert induction_variable(tree, for_loops(tree)[0]) == "i"

    @pytest.mark.parametrize("header", [
        "for (;;)",
        "for (i = 0; i < n; j++)",
        "for (i = 0; i < f(n); i++)",
        "for (i = 0, j = 0; i < n; i++)",
        "for (i = 0; n; i++)",
    ])
    def test_non_canonical_headers(self, header):
        """Test headers outside canonical form."""
        tree = parse_source(header + " a[i] = 0;", Language.C)
        assert induction_variable(tree, for_loops(tree)[0]) is None


class TestAnalyzeLoop:
    """Test analyze_loop."""

    def test_reduction_forms(self):
        """Test compound, expanded and min/max reductions are recognised."""
        analysis = analysis_of(
            "for (i = 0; i < n; i++) { s += a[i]; p = p * a[i]; m = fmax(m, a[i]); }"
        )
        assert analysis.reductions == {"s": "+", "p": "*", "m": "max"}

    def test_carried_scalar_not_reduction(self):
        """Test a scalar read outside its update is not a reduction."""
        analysis = analysis_of("for (i = 0; i < n; i++) { s += a[i]; b[i] = s; }")
        assert "s" in analysis.outer_writes
        assert "s" not in analysis.reductions

    def test_inner_induction_and_locals(self):
        """Test inner loop indices and body declarations."""
        analysis = analysis_of(
            "for (i = 0; i < n; i++) { double t = 0; for (j = 0; j < m; j++) t += a[j]; b[i] = t; }"
        )
        assert analysis.inner_induction_vars == {"j"}
        assert "t" in analysis.local_names
        assert analysis.outer_writes == {"j"}

    def test_escapes_and_calls(self):
        """Test early exits and impure calls are recorded."""
        analysis = analysis_of(
            "for (i = 0; i < n; i++) { if (a[i] < 0) break; printf(\"%d\", i); b[i] = sqrt(a[i]); }"
        )
        assert analysis.escapes == ["break_statement"]
        assert analysis.unsafe_calls == {"printf"}

    def test_break_inside_inner_loop_is_shielded(self):
        """Test a break that leaves an inner loop does not leave the outer one."""
        analysis = analysis_of(
            "for (i = 0; i < n; i++) { for (j = 0; j < m; j++) { if (a[j]) break; } }"
        )
        assert analysis.escapes == []


class TestCheckLoop:
    """Test check_loop."""

    def test_clean_loop(self):
        """Test a simple loop has no issues."""
        assert check_loop("for (i = 0; i < n; i++) a[i] = b[i];").ok

    def test_issue_tags(self):
        """Test non-canonical headers, early exits and clause conflicts."""
        check = check_loop("while (1) { }")
        assert check.issues == (NON_CANONICAL,)
        check = check_loop("for (i = 0; i < n; i++) { if (a[i]) return; }")
        assert check.issues == (EARLY_EXIT,)
        check = check_loop("for (i = 0; i < n; i++) s += a[i];", "#pragma omp parallel for private(s) reduction(+:s)")
        assert check.issues == (CLAUSE_CONFLICT,)
