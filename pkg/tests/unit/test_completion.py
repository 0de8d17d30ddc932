"""Unit tests for completion pairs."""

import pytest

from hpcforge.corpus.completion import CUTS, completion_pairs, record_tokens, truncate_prefix
from hpcforge.errors import TooShort


class TestTruncatePrefix:
    """Test truncate_prefix."""

    def test_split(self):
        """Test prefix and suffix partition the stream."""
        tokens = [str(i) for i in range(10)]
        pair = truncate_prefix(tokens, 4, origin="f:g")
        assert pair.prefix_tokens == tokens[:4]
        assert pair.suffix_tokens == tokens[4:]
        assert pair.prompt == "0 1 2 3"
        assert pair.origin == "f:g"

    def test_too_short(self):
        """Test a stream no longer than the cut is rejected."""
        with pytest.raises(TooShort):
            truncate_prefix(["a", "b"], 2)

    def test_non_positive_cut(self):
        """Test cuts must be positive."""
        with pytest.raises(ValueError):
            truncate_prefix(["a", "b"], 0)

    def test_replacement_tokens_fused_in_prompt(self):
        """Test prompts render replacement identifiers whole."""
        pair = truncate_prefix(["int", "var", "_", "3", "=", "1", ";"], 5)
        assert pair.prompt == "int var_3 ="
        assert pair.reference == "1 ;"


class TestCompletionPairs:
    """Test completion_pairs."""

    def test_pairs_per_cut(self):
        """Test one pair per cut the record is long enough for."""
        record = {"file_id": "abc", "name": "f", "lang": "c", "tokens": ["t"] * 350}
        pairs = completion_pairs([record])
        assert [p.cut for p in pairs] == [100, 300]
        assert pairs[0].origin == "abc:f"
        assert CUTS == (100, 300, 600)

    def test_tokens_recomputed_from_code(self):
        """Test records without tokens are tokenized from their code."""
        record = {"lang": "c", "code": "int x = 1 ;\n"}
        assert record_tokens(record) == ["int", "x", "=", "1", ";"]
        assert [p.cut for p in completion_pairs([record], cuts=[2, 5])] == [2]
