"""Pytest configuration and fixtures."""

import json
import os
from pathlib import Path
from typing import Dict, List
from unittest.mock import patch

import pytest

from hpcforge.utils.config_manager import ConfigManager, GlobalConfig
from hpcforge.utils.system_info import has_openmp_toolchain

FIXTURES = Path(__file__).parent / "fixtures"

PI_SNIPPET = "int main() {\n  int r[2800 + 1];\n}\n"

SAXPY = """\
void saxpy(int n, float a, float *x, float *y) {
    int i;
    for (i = 0; i < n; i++) {
        y[i] = a * x[i] + y[i];
    }
}
"""

ANNOTATED = """\
#include <stdio.h>

double dot(int n, double *a, double *b) {
    int i;
    double sum = 0.0;
    #pragma omp parallel for reduction(+:sum)
    for (i = 0; i < n; i++) {
        sum += a[i] * b[i];
    }
    return sum;
}

void scale(int n, int m, double *a) {
    int i, j;
    #pragma omp parallel for private(j)
    for (i = 0; i < n; i++) {
        for (j = 0; j < m; j++) {
            a[i * m + j] *= 2.0;
        }
    }
    for (i = 0; i < n; i++) {
        a[i] = a[i] + 1.0;
    }
}
"""


def _kernel_function(index: int) -> str:
    return f"""\
int kernel_{index}(int n, double *a, double *b, double *c) {{
    int i, j, count = 0;
    double total = {index}.5;
    for (i = 0; i < n; i++) {{
        a[i] = b[i] * {index + 2} + c[i];
        if (a[i] > total) {{
            total = a[i] - {index % 7};
            count++;
        }}
    }}
    for (j = n - 1; j >= 0; j--) {{
        c[j] = a[j] / (b[j] + {index + 1}.0);
        total += c[j] * {index % 11 + 3};
    }}
    printf("kernel %d done: %f\\n", {index}, total);
    return count + (int) total;
}}
"""


def _lookup_function(index: int) -> str:
    return f"""\
int lookup_{index}(int n, const int *keys, int key) {{
    enum state {{ START, SEEN = {index % 5 + 2}, DONE }} st = START;
    int k;
    for (k = 0; k < n; k++) {{
        if (keys[k] == key + {index}) {{
            st = SEEN;
            goto out;
        }}
    }}
    st = DONE;
out:
    switch (st) {{
    case SEEN:
        return k;
    case DONE:
        return -{index + 1};
    default:
        return 0;
    }}
}}
"""


def _apply_function(index: int) -> str:
    return f"""\
double apply_{index}(double (*fn)(double), const double *xs, int n) {{
    typedef double acc_t;
    acc_t best = xs[0];
    int k;
    for (k = 1; k < n; k++) {{
        acc_t y = fn(xs[k]) * {index % 9 + 1};
        if (y > best)
            best = y;
    }}
    printf("apply_{index}: %g\\n", best);
    return best;
}}
"""


def _scan_function(index: int) -> str:
    return f"""\
long scan_{index}(int n, const char *text, long *out) {{
    long run = 0;
    int k;
#ifdef TRACE
    printf("scan %d\\n", n);
#endif
    #pragma omp parallel for reduction(+:run)
    for (k = 0; k < n; k++) {{
        if (text[k] == '{chr(97 + index % 26)}')
            run += {index % 13 + 1};
    }}
    out[{index % 3}] = run;
    return run;
}}
"""


_TEMPLATES = (_kernel_function, _lookup_function, _apply_function, _scan_function)


def _corpus_function(index: int) -> str:
    """A function whose shape cycles with ``index`` and whose constants depend on it."""
    return _TEMPLATES[index % len(_TEMPLATES)](index)


def write_corpus(root: Path, files: int = 40, functions_per_file: int = 5) -> Path:
    """Write ``files`` C files holding ``functions_per_file`` distinct functions each."""
    repo = root / "repo_a"
    repo.mkdir(parents=True, exist_ok=True)
    for f in range(files):
        body = "#include <stdio.h>\n\n" + "\n".join(
            _corpus_function(f * functions_per_file + k) for k in range(functions_per_file)
        )
        (repo / f"file_{f:03d}.c").write_text(body, encoding="utf-8")
    return root


# The generated loop dataset: 10 files with one private(j) loop over a nested
# plain loop, 10 files with one reduction loop and one plain loop, and 10
# files with two plain loops.
OMPDATA_FILES = 30
OMPDATA_PRIVATE = 10
OMPDATA_REDUCTION = 10
OMPDATA_NEGATIVES = 30


def _private_file(index: int) -> str:
    return f"""\
void fill_{index}(int n, int m, double *a) {{
    int i, j;
    #pragma omp parallel for private(j)
    for (i = 0; i < n; i++) {{
        for (j = 0; j < m; j++) {{
            a[i * m + j] = i + j + {index};
        }}
    }}
}}
"""


def _reduction_file(index: int) -> str:
    return f"""\
double sum_{index}(int n, double *a) {{
    int i;
    double s = 0.0;
    #pragma omp parallel for reduction(+:s)
    for (i = 0; i < n; i++) {{
        s += a[i] * {index + 1};
    }}
    for (i = 0; i < n; i++) {{
        a[i] = s;
    }}
    return s;
}}
"""


def _plain_file(index: int) -> str:
    return f"""\
void shift_{index}(int n, double *a, double *b) {{
    int i;
    for (i = 1; i < n; i++) {{
        a[i] = a[i - 1] + {index};
    }}
    for (i = 0; i < n; i++) {{
        b[i] = a[i] * 2;
    }}
}}
"""


def write_ompdata(root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    for k in range(10):
        (root / f"private_{k}.c").write_text(_private_file(k), encoding="utf-8")
        (root / f"reduction_{k}.c").write_text(_reduction_file(k), encoding="utf-8")
        (root / f"plain_{k}.c").write_text(_plain_file(k), encoding="utf-8")
    return root


# Loop labels and predictions for the pragma evaluation fixture.
PRAGMA_CASES: List[Dict[str, object]] = [
    # label has private and reduction, prediction has private only
    {"id": "l1", "label": "#pragma omp parallel for private(j) reduction(+:s)",
     "pred": "#pragma omp parallel for private(j)"},
    # extra predicted private variable
    {"id": "l2", "label": "#pragma omp parallel for private(A, B)",
     "pred": "#pragma omp parallel for private(A, B, X)"},
    {"id": "l3", "label": "#pragma omp parallel for reduction(*:p)",
     "pred": "#pragma omp parallel for reduction(*:p)"},
    {"id": "l4", "label": None, "pred": None},
]


@pytest.fixture
def pi_snippet() -> str:
    """The smallest function exercising all replacement categories but str."""
    return PI_SNIPPET


@pytest.fixture
def saxpy_source() -> str:
    return SAXPY


@pytest.fixture
def annotated_source() -> str:
    """A C file with a reduction loop, a private loop and a plain loop."""
    return ANNOTATED


@pytest.fixture
def corpus_root(tmp_path) -> Path:
    """A generated repository of 40 files and 200 functions."""
    return write_corpus(tmp_path / "corpus")


@pytest.fixture
def ompdata_root(tmp_path) -> Path:
    """Thirty generated files with known positive and negative loop counts."""
    return write_ompdata(tmp_path / "ompdata")


@pytest.fixture
def pragma_case_files(tmp_path):
    """Loop JSONL with ground-truth pragmas and a matching prediction JSONL."""
    loops = tmp_path / "loops.jsonl"
    preds = tmp_path / "preds.jsonl"
    with open(loops, "w") as f:
        for case in PRAGMA_CASES:
            record = {"v": 1, "id": case["id"], "loop": "for (i = 0; i < n; i++) { }",
                      "pragma": case["label"], "source_pragma": case["label"], "bench": None, "lang": "c"}
            f.write(json.dumps(record) + "\n")
    with open(preds, "w") as f:
        for case in PRAGMA_CASES:
            f.write(json.dumps({"id": case["id"], "pragma": case["pred"]}) + "\n")
    return loops, preds


@pytest.fixture
def mock_environment():
    """Mock HPCFORGE_* environment variables."""
    env_vars = {
        "HPCFORGE_SEED": "42",
        "HPCFORGE_TOKOMPILER_SUFFIX_RANGE_MAX": "5000",
        "HPCFORGE_HARNESS_MODEL_TOKEN": "test-token",
    }
    with patch.dict(os.environ, env_vars):
        yield env_vars


@pytest.fixture
def mock_keyring():
    """Mock keyring functionality."""
    with patch("keyring.get_password") as mock_get, \
         patch("keyring.set_password") as mock_set, \
         patch("keyring.delete_password") as mock_delete:

        mock_get.return_value = "keychain-token"
        mock_set.return_value = None
        mock_delete.return_value = None

        yield {
            "get_password": mock_get,
            "set_password": mock_set,
            "delete_password": mock_delete,
        }


@pytest.fixture
def config_manager(mock_environment, mock_keyring):
    """ConfigManager instance with mocked dependencies."""
    return ConfigManager()


@pytest.fixture
def default_config() -> GlobalConfig:
    return GlobalConfig()


def pytest_collection_modifyitems(config, items):
    """Skip ``requires_compiler`` tests when no OpenMP-capable compiler is installed."""
    if any("requires_compiler" in item.keywords for item in items) and not has_openmp_toolchain():
        skip = pytest.mark.skip(reason="no OpenMP-capable C compiler found")
        for item in items:
            if "requires_compiler" in item.keywords:
                item.add_marker(skip)
