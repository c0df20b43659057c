"""Sphinx configuration for the mcdh API reference."""

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join("..", "..")))

project = "mcdh"
copyright = "2026, mcdh developers"
author = "mcdh developers"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
]

autodoc_member_order = "bysource"
autodoc_typehints = "description"

templates_path = ["_templates"]
exclude_patterns = []
master_doc = "index"

html_theme = "sphinx_rtd_theme"
html_theme_options = {
    "navigation_depth": -1,
}
html_static_path = ["_static"]
