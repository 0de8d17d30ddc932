"""Unit tests for token streams."""

import re

from hpcforge.parsing.functions import extract_functions
from hpcforge.parsing.source import Language, parse_source
from hpcforge.tokompiler.anonymizer import anonymize
from hpcforge.tokompiler.lexer import NEWLINE, TokenStream, count_tokens, join_tokens, lexicalize, tokenize_source


class TestLexicalize:
    """Test lexicalize."""

    def test_pi_snippet_tokens(self, pi_snippet):
        """Test replacement identifiers split into category, underscore and digits."""
        unit = extract_functions(parse_source(pi_snippet, Language.C), "f")[0]
        stream = lexicalize(anonymize(unit, seed=0))
        assert stream.tokens[:4] == ["int", "func", "_", stream.tokens[3]]
        assert stream.tokens[3].isdigit()
        assert re.fullmatch(r"int func_(\d+) \( \) \{ int arr_(\d+) \[ num_(\d+) \+ num_(\d+) \] ; \}",
                            stream.to_code())

    def test_pragma_line_break_tokens(self):
        """Test preprocessor lines are delimited by newline tokens."""
        code = "void f(int n, int *a) {\n  int i;\n  #pragma omp parallel for\n  for (i = 0; i < n; i++) a[i] = 0;\n}\n"
        unit = extract_functions(parse_source(code, Language.C), "f")[0]
        tokens = lexicalize(anonymize(unit, seed=0)).tokens
        start = tokens.index("#pragma")
        assert tokens[start - 1] == NEWLINE
        assert tokens[start + 1:start + 4] == ["omp", "parallel", "for"]
        assert tokens[start + 4] == NEWLINE


class TestTokenStream:
    """Test TokenStream."""

    def test_to_code_fuses_triples(self):
        """Test only valid replacement triples are fused."""
        stream = TokenStream(["var", "_", "12", "=", "x", "_", "y"])
        assert stream.to_code() == "var_12 = x _ y"
        assert len(stream) == 7

    def test_join_tokens(self):
        """Test join_tokens matches to_code."""
        assert join_tokens(["num", "_", "3", "+", "1"]) == "num_3 + 1"


class TestTokenizeSource:
    """Test raw source tokenization."""

    def test_comments_removed(self):
        """Test comments are not tokens."""
        assert tokenize_source("x = y + 1; // add", Language.C) == ["x", "=", "y", "+", "1", ";"]

    def test_string_literal_whole(self):
        """Test strings stay single tokens."""
        assert '"a b c"' in tokenize_source('s = "a b c";', Language.C)

    def test_count_tokens(self, saxpy_source):
        """Test counting agrees with tokenizing."""
        assert count_tokens(saxpy_source, Language.C) == len(tokenize_source(saxpy_source, Language.C))
