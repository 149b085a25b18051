# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Project information -----------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#project-information

import sys
import os

sys.path.insert(0, os.path.abspath('../..'))
from hpdsim import __version__

project = 'hpdsim'
copyright = '2024, Efabless Corporation'
release = __version__

# -- General configuration ---------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#general-configuration

extensions = ['myst_parser']

source_suffix = {
    '.md': 'markdown',
    '.rst': 'restructuredtext',
}

templates_path = ['_templates']
exclude_patterns = []


# -- Options for HTML output -------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#options-for-html-output
html_title = 'hpdsim Documentation'
html_theme = 'furo'
html_static_path = ['_static']

# Auto-generated header anchors.
# https://myst-parser.readthedocs.io/en/stable/syntax/optional.html#syntax-header-anchors
myst_heading_anchors = 2
