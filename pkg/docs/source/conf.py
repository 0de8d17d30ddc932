"""Sphinx configuration for the hpcforge documentation."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parents[2]))

project = "HPCForge"
author = "HPCForge Contributors"
copyright = "2026, HPCForge Contributors"

try:
    from hpcforge import __version__ as release
except ImportError:
    release = "0.1.0"
version = ".".join(release.split(".")[:2])

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.intersphinx",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
    "sphinx_autodoc_typehints",
    "myst_parser",
]
source_suffix = {".rst": "restructuredtext", ".md": "markdown"}
master_doc = "index"
exclude_patterns = ["_build", "build"]

autodoc_mock_imports = ["tree_sitter", "tree_sitter_c", "tree_sitter_cpp"]
autodoc_default_options = {
    "members": True,
    "member-order": "bysource",
    "undoc-members": True,
}
autosummary_generate = True

# Docstrings use the Google "Args / Returns / Raises" layout.
napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_use_rtype = True
typehints_use_signature = True

intersphinx_mapping = {
    "python": ("https://docs.python.org/3/", None),
    "pandas": ("https://pandas.pydata.org/pandas-docs/stable/", None),
    "pydantic": ("https://docs.pydantic.dev/latest/", None),
}

myst_enable_extensions = ["colon_fence", "deflist"]

html_theme = "sphinx_rtd_theme"
html_theme_options = {"navigation_depth": 3, "collapse_navigation": False}
