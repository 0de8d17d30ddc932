"""Unit tests for corpus curation."""

import shutil

import jsonlines

from hpcforge.corpus.builder import CorpusStats, LanguageStats, build_corpus, read_stats
from hpcforge.corpus.ingest import RawFile, dedup, filter_size, ingest, language_for
from hpcforge.parsing.source import Language, parse_source
from hpcforge.tokompiler.anonymizer import REPLACEMENT
from hpcforge.utils.config_manager import GlobalConfig


def corpus_config(roots, **corpus) -> GlobalConfig:
    return GlobalConfig(corpus={"roots": list(roots), **corpus})


class TestIngest:
    """Test ingest, dedup and the size filter."""

    def test_ingest_sorted_with_repo_names(self, corpus_root):
        """Test files come in path order and carry their repository name."""
        files = list(ingest(corpus_root))
        assert len(files) == 40
        assert [f.path for f in files] == sorted(f.path for f in files)
        assert {f.repo for f in files} == {"repo_a"}
        assert all(f.language is Language.C for f in files)

    def test_unknown_suffix_skipped(self, tmp_path):
        """Test files without a known suffix are ignored."""
        (tmp_path / "notes.txt").write_text("int x;")
        (tmp_path / "a.cpp").write_text("int x;")
        files = list(ingest(tmp_path))
        assert [f.path.name for f in files] == ["a.cpp"]
        assert files[0].language is Language.CPP

    def test_single_file_root(self, tmp_path):
        """Test a file can be given instead of a directory."""
        path = tmp_path / "one.c"
        path.write_text("int x;")
        assert [f.path for f in ingest(path)] == [path]

    def test_language_for_case_insensitive(self, tmp_path):
        """Test upper-case suffixes fall back to their lower-case mapping."""
        assert language_for(tmp_path / "X.CPP", {".cpp": Language.CPP}) is Language.CPP
        assert language_for(tmp_path / "x.py", {".cpp": Language.CPP}) is None

    def test_dedup_keeps_first(self, corpus_root):
        """Test identical content is kept once."""
        shutil.copy(corpus_root / "repo_a" / "file_000.c", corpus_root / "repo_a" / "zz_copy.c")
        files = dedup(ingest(corpus_root))
        assert len(files) == 40
        assert files[0].path.name == "file_000.c"

    def test_filter_size_bounds(self):
        """Test both bounds are strict."""
        small = RawFile(path=None, data=b"int x;", language=Language.C)
        assert not filter_size(small, min_tokens=3)
        assert filter_size(small, min_tokens=2)
        assert not filter_size(small, min_tokens=0, max_bytes=small.size_bytes)
        assert filter_size(small, min_tokens=0, max_bytes=small.size_bytes + 1)

    def test_content_hash_set(self):
        """Test RawFile hashes its content on creation."""
        assert RawFile(path=None, data=b"a", language=Language.C).content_hash == \
            RawFile(path=None, data=b"a", language=Language.CPP).content_hash


class TestBuildCorpus:
    """Test build_corpus."""

    def test_counts_match_records(self, corpus_root, tmp_path):
        """Test statistics agree with the emitted records."""
        out = tmp_path / "corpus.jsonl"
        stats = build_corpus(corpus_config([corpus_root]), out)
        with jsonlines.open(out) as reader:
            records = list(reader)
        assert stats.function_count == len(records) == 200
        assert stats.file_count == 40
        assert stats.languages[Language.C].repos == 1
        assert stats.duplicates_dropped == 0

    def test_records_are_canonical(self, corpus_root, tmp_path):
        """Test emitted code is clean, comment free and versioned."""
        out = tmp_path / "corpus.jsonl"
        build_corpus(corpus_config([corpus_root], emit_tokens=True), out)
        with jsonlines.open(out) as reader:
            record = reader.read()
        assert record["v"] == 1
        assert record["lang"] == "c"
        assert record["name"] == "kernel_0"
        assert parse_source(record["code"], Language.C).is_clean
        assert len(record["tokens"]) > 100

    def test_anonymized_corpus(self, corpus_root, tmp_path):
        """Test anonymized records carry their map and seed."""
        out = tmp_path / "corpus.jsonl"
        build_corpus(corpus_config([corpus_root], anonymize=True), out)
        with jsonlines.open(out) as reader:
            record = reader.read()
        assert "kernel_0" not in record["code"]
        assert all(REPLACEMENT.match(v) for v in record["map"]["entries"].values())
        assert isinstance(record["seed"], int)

    def test_duplicates_and_filtered(self, corpus_root, tmp_path):
        """Test duplicates and tiny files are counted, not emitted."""
        shutil.copy(corpus_root / "repo_a" / "file_000.c", corpus_root / "repo_a" / "zz_copy.c")
        (corpus_root / "repo_a" / "tiny.c").write_text("int x;\n")
        stats = build_corpus(corpus_config([corpus_root]), tmp_path / "c.jsonl")
        assert stats.duplicates_dropped == 1
        assert stats.files_filtered == 1
        assert stats.file_count == 41
        assert stats.function_count == 200

    def test_parallel_matches_serial(self, corpus_root, tmp_path):
        """Test worker processes do not change the output."""
        serial, parallel = tmp_path / "s.jsonl", tmp_path / "p.jsonl"
        build_corpus(corpus_config([corpus_root], anonymize=True), serial)
        config = GlobalConfig(jobs=2, corpus={"roots": [corpus_root], "anonymize": True})
        build_corpus(config, parallel)
        assert serial.read_bytes() == parallel.read_bytes()

    def test_read_stats(self, corpus_root, tmp_path):
        """Test statistics can be recomputed from the file."""
        out = tmp_path / "corpus.jsonl"
        build_corpus(corpus_config([corpus_root]), out)
        stats = read_stats(out)
        assert stats.function_count == 200
        assert stats.file_count == 40

    def test_cpp_repository(self, tmp_path):
        """Test C++ files are counted under their own language."""
        repo = tmp_path / "root" / "cpp_repo"
        repo.mkdir(parents=True)
        body = "\n".join(
            f"int f{k}(std::vector<int>& v) {{ int s = {k}; for (auto x : v) {{ s += x * {k}; s -= x / 2; "
            f"s ^= x; s |= {k} + x; }} return s + {k} * 3 - 1; }}" for k in range(8)
        )
        (repo / "a.cpp").write_text(body)
        stats = build_corpus(corpus_config([tmp_path / "root"]), tmp_path / "c.jsonl")
        assert stats.languages[Language.CPP].function_count == 8


class TestCorpusStats:
    """Test CorpusStats."""

    def test_addition_merges_repos(self):
        """Test merging keeps distinct repository names."""
        a = CorpusStats(languages={Language.C: LanguageStats(frozenset({"r1"}), 10, 1, 2)})
        b = CorpusStats(languages={Language.C: LanguageStats(frozenset({"r1", "r2"}), 5, 1, 1)},
                        duplicates_dropped=3)
        total = a + b
        assert total.languages[Language.C].repos == 2
        assert total.size_bytes == 15
        assert total.function_count == 3
        assert total.duplicates_dropped == 3

    def test_to_frame_has_total_row(self):
        """Test the table ends with a total row."""
        stats = CorpusStats(languages={
            Language.C: LanguageStats(frozenset({"r1"}), 10, 1, 2),
            Language.CPP: LanguageStats(frozenset({"r2"}), 20, 2, 4),
        })
        frame = stats.to_frame()
        assert list(frame.index) == ["c", "cpp", "total"]
        assert frame.loc["total", "functions"] == 6
        assert frame.loc["total", "repos"] == 2

    def test_to_dict(self):
        """Test the report form."""
        stats = CorpusStats(languages={Language.C: LanguageStats(frozenset({"r"}), 7, 1, 1)})
        data = stats.to_dict()
        assert data["kind"] == "corpus_stats"
        assert data["languages"]["c"] == {"repos": 1, "size_bytes": 7, "files": 1, "functions": 1}
