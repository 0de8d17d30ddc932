"""Unit tests for the anonymizer."""

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpcforge.errors import ReparseFailure, SuffixExhaustion, UnknownReplacement
from hpcforge.parsing.functions import FunctionUnit, extract_functions
from hpcforge.parsing.source import Language, parse_source
from hpcforge.tokompiler.anonymizer import (
    REPLACEMENT,
    AnonymizedUnit,
    Category,
    RenameMap,
    anonymize,
    compile_preamble,
    deanonymize,
    derive_seed,
    draw_suffixes,
    embed_in_file,
    is_isomorphic,
    normalize,
)
from hpcforge.corpus.ingest import ingest
from hpcforge.utils.config_manager import TokompilerConfig
from tests.conftest import FIXTURES, write_corpus

PRAGMA_FUNCTION = """\
double dot(int n, double *a, double *b) {
    int i;
    double sum = 0.0;
    #pragma omp parallel for reduction(+:sum) private(i)
    for (i = 0; i < n; i++) {
        sum += a[i] * b[i];
    }
    return sum;
}
"""


def unit_of(code: str, language: Language = Language.C) -> FunctionUnit:
    units = extract_functions(parse_source(code, language), "file-id")
    assert units, "fixture code has no function"
    return units[0]


def construct_units():
    units = []
    for path in sorted((FIXTURES / "tokompile").iterdir()):
        language = Language.CPP if path.suffix == ".cpp" else Language.C
        units.extend(extract_functions(parse_source(path.read_bytes(), language), path.name))
    return units


CONSTRUCT_UNITS = construct_units()


def identifier_leaves(tree):
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if node.is_leaf and node.kind in ("identifier", "type_identifier", "statement_identifier"):
            yield tree.node_text(node).decode()
        stack.extend(node.children)


def assert_tokompiler_invariants(unit: FunctionUnit, seed: int) -> AnonymizedUnit:
    anon = anonymize(unit, seed=seed)
    tree = anon.parse()
    assert tree.is_clean, unit.name
    assert is_isomorphic(unit.parse(), tree), unit.name
    assert anonymize(unit, seed=seed).code == anon.code, unit.name
    assert deanonymize(anon) == normalize(unit), unit.name
    leaked = set(anon.map.symbols()) & set(identifier_leaves(tree))
    assert not leaked, f"{unit.name}: {sorted(leaked)}"
    return anon


class TestAnonymize:
    """Test anonymize."""

    def test_pi_snippet_template(self, pi_snippet):
        """Test the categories and suffix ranges of a small function."""
        anon = anonymize(unit_of(pi_snippet), seed=3)
        text = anon.code.decode()
        match = re.fullmatch(r"int (func_\d+) \( \) \{\nint (arr_\d+) \[ (num_\d+) \+ (num_\d+) \] ;\n\}\n", text)
        assert match, text
        suffixes = [int(REPLACEMENT.match(g).group(2)) for g in match.groups()]
        assert len(set(suffixes)) == 4
        assert all(1 <= s <= 1000 for s in suffixes)
        assert anon.map.entries["main"] == match.group(1)
        assert anon.map.entries["r"] == match.group(2)
        assert anon.map.categories["2800"] is Category.NUM

    def test_output_parses_and_has_no_comments(self):
        """Test the rewritten code is clean and comment free."""
        code = "int f(int x) {\n  // note\n  return x + 1; /* tail */\n}\n"
        anon = anonymize(unit_of(code), seed=0)
        assert anon.parse().is_clean
        assert b"note" not in anon.code and b"tail" not in anon.code

    def test_isomorphic_to_original(self, saxpy_source):
        """Test anonymization only renames."""
        unit = unit_of(saxpy_source)
        anon = anonymize(unit, seed=11)
        assert is_isomorphic(unit.parse(), anon.parse())

    def test_deterministic_for_seed(self, saxpy_source):
        """Test same seed, same output; other seed, other suffixes."""
        unit = unit_of(saxpy_source)
        assert anonymize(unit, seed=5).code == anonymize(unit, seed=5).code
        assert anonymize(unit, seed=5).map.entries != anonymize(unit, seed=6).map.entries

    def test_external_names_untouched(self):
        """Test library calls and types keep their names."""
        code = 'int g(void) {\n  printf("%d\\n", 3);\n  size_t k = strlen("ab");\n  return (int) k;\n}\n'
        anon = anonymize(unit_of(code), seed=1)
        text = anon.code.decode()
        assert "printf" in text and "strlen" in text and "size_t" in text
        assert '"ab"' not in text
        assert re.search(r"\bstr_\d+\b", text)

    def test_pragma_variables_renamed(self):
        """Test clause variables follow the declarations they name."""
        anon = anonymize(unit_of(PRAGMA_FUNCTION), seed=2)
        sum_name, i_name = anon.map.entries["sum"], anon.map.entries["i"]
        text = anon.code.decode()
        assert f"reduction(+:{sum_name})" in text
        assert f"private({i_name})" in text

    def test_existing_replacement_names_reserved(self):
        """Test suffixes of identifiers already shaped like replacements are never drawn."""
        code = "int f(int var_7) {\n  int y = var_7;\n  return y;\n}\n"
        anon = anonymize(unit_of(code), seed=0, config=TokompilerConfig(suffix_range_max=10))
        assert "var_7" in anon.map.reserved
        assert all(not v.endswith("_7") for v in anon.map.entries.values())

    def test_suffix_exhaustion(self, saxpy_source):
        """Test too small a range fails unless auto-extended."""
        unit = unit_of(saxpy_source)
        with pytest.raises(SuffixExhaustion):
            anonymize(unit, seed=0, config=TokompilerConfig(suffix_range_max=2))
        anon = anonymize(unit, seed=0, config=TokompilerConfig(suffix_range_max=2, auto_extend=True))
        assert anon.map.suffix_range_max == 20

    def test_unparseable_unit(self):
        """Test a broken unit is refused."""
        unit = FunctionUnit(b"int f( {", Language.C, "x", (0, 8), "f")
        with pytest.raises(ReparseFailure):
            anonymize(unit, seed=0)

    def test_cpp_function(self):
        """Test C++ units anonymize and round-trip."""
        code = "int sum(const std::vector<int>& v) {\n  int t = 0;\n  for (int x : v) t += x;\n  return t;\n}\n"
        unit = unit_of(code, Language.CPP)
        anon = anonymize(unit, seed=9)
        assert "std" in anon.code.decode() and "vector" in anon.code.decode()
        assert deanonymize(anon) == normalize(unit)


class TestDeanonymize:
    """Test deanonymize."""

    def test_round_trip(self, saxpy_source):
        """Test inversion restores the canonical original."""
        unit = unit_of(saxpy_source)
        assert deanonymize(anonymize(unit, seed=4)) == normalize(unit)

    def test_round_trip_with_pragma(self):
        """Test pragma clause variables are restored too."""
        unit = unit_of(PRAGMA_FUNCTION)
        assert deanonymize(anonymize(unit, seed=8)) == normalize(unit)

    def test_unknown_replacement(self, pi_snippet):
        """Test a replacement token missing from the map is reported."""
        anon = anonymize(unit_of(pi_snippet), seed=0)
        broken = AnonymizedUnit(code=anon.code.replace(b"[", b"[ var_99999 +", 1), map=anon.map, origin=anon.origin)
        with pytest.raises(UnknownReplacement):
            deanonymize(broken)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**64 - 1))
    def test_round_trip_any_seed(self, seed):
        """Test the round trip holds for arbitrary seeds."""
        unit = unit_of(PRAGMA_FUNCTION)
        anon = anonymize(unit, seed=seed)
        assert deanonymize(anon) == normalize(unit)
        assert len(anon.map.replacements()) == len(anon.map.entries)


class TestRenameMap:
    """Test RenameMap and seed helpers."""

    def test_not_injective(self):
        """Test two originals cannot share a replacement."""
        with pytest.raises(ValueError):
            RenameMap(entries={"a": "var_1", "b": "var_1"})

    def test_dict_round_trip(self, pi_snippet):
        """Test the JSON form restores entries and categories."""
        rename_map = anonymize(unit_of(pi_snippet), seed=1).map
        restored = RenameMap.from_dict(rename_map.to_dict())
        assert restored.entries == rename_map.entries
        assert restored.categories == rename_map.categories

    def test_derive_seed(self):
        """Test derived seeds are stable and depend on every input."""
        seed = derive_seed(0, "abc", (0, 10))
        assert seed == derive_seed(0, "abc", (0, 10))
        assert seed != derive_seed(1, "abc", (0, 10))
        assert seed != derive_seed(0, "abc", (0, 11))
        assert 0 <= seed < 2**64

    def test_draw_suffixes_excludes(self):
        """Test excluded suffixes are never drawn."""
        suffixes, upper = draw_suffixes(8, seed=0, suffix_range_max=10, excluded=frozenset({1, 2}))
        assert upper == 10
        assert sorted(suffixes) == [3, 4, 5, 6, 7, 8, 9, 10]


class TestCompileHelpers:
    """Test helpers that make anonymized code compilable."""

    def test_compile_preamble(self, pi_snippet):
        """Test literal replacements are bound to their values."""
        anon = anonymize(unit_of(pi_snippet), seed=0)
        preamble = compile_preamble(anon)
        assert f"#define {anon.map.entries['2800']} 2800\n" in preamble
        assert f"#define {anon.map.entries['1']} 1\n" in preamble

    def test_embed_in_file(self, annotated_source):
        """Test the function is swapped and its prototype kept."""
        units = extract_functions(parse_source(annotated_source, Language.C), "f")
        anon = anonymize(units[0], seed=0)
        embedded = embed_in_file(annotated_source.encode(), anon)
        assert anon.code in embedded
        assert b"double dot(int n, double *a, double *b);\n" in embedded
        assert parse_source(embedded, Language.C).is_clean


class TestInvariantsAcrossUnits:
    """Test the anonymizer invariants on varied functions and a whole corpus."""

    @pytest.mark.parametrize("unit", CONSTRUCT_UNITS, ids=lambda u: u.name)
    def test_constructs(self, unit):
        """Test goto, enums, typedefs, lambdas, templates, try/catch and in-body directives."""
        anon = assert_tokompiler_invariants(unit, derive_seed(0, unit.file_id, unit.byte_span))
        assert b"accumulate" not in anon.code

    def test_construct_fixtures_extracted(self):
        """Test every fixture function is picked up."""
        names = {u.name for u in CONSTRUCT_UNITS}
        assert {"find_first", "classify", "apply_twice", "dot", "sum_matrix"} <= names
        assert {"clamp_value", "parse_count", "scaled_sum", "sort_desc", "join"} <= names

    def test_declared_names_renamed_by_category(self):
        """Test labels, enumerators, local typedefs and arrays are renamed."""
        by_name = {u.name: u for u in CONSTRUCT_UNITS}
        entries = anonymize(by_name["find_first"], seed=1).map.entries
        assert entries["found"].startswith("var_")
        entries = anonymize(by_name["classify"], seed=1).map.entries
        assert all(entries[n].startswith("var_") for n in ("level", "LOW", "MID", "HIGH", "grade"))
        entries = anonymize(by_name["norm"], seed=1).map.entries
        assert entries["real"].startswith("var_")
        assert "point_t" not in entries
        entries = anonymize(by_name["report"], seed=1).map.entries
        assert entries["names"].startswith("arr_")
        assert entries["buffer"].startswith("arr_")

    def test_corpus_of_200_functions(self, tmp_path):
        """Test reparse, isomorphism, determinism, round trip and no leakage on every corpus function."""
        units = []
        for raw in ingest(write_corpus(tmp_path / "corpus")):
            units.extend(extract_functions(parse_source(raw.data, raw.language), raw.content_hash))
        assert len(units) == 200
        assert len({u.name.split("_")[0] for u in units}) == 4
        for unit in units:
            assert_tokompiler_invariants(unit, derive_seed(0, unit.file_id, unit.byte_span))
