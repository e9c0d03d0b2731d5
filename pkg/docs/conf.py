# Configuration file for the Sphinx documentation builder.
#
# This file only contains a selection of the most common options. For a full
# list see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.getcwd(), "..")))


# -- Project information -----------------------------------------------------

project = "cvmdi-ps"
copyright = "2026, the cvmdi-ps developers"
author = "the cvmdi-ps developers"

# The short X.Y version
version = "0.1"

# The full version, including alpha/beta/rc tags
release = "0.1.0"


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.mathjax',
    'sphinx_rtd_theme',
    'enum_tools.autoenum',
]

templates_path = ['_templates']

language = 'en'

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'

html_static_path = []

# -- Extension configuration -------------------------------------------------

## Autodoc settings
autodoc_default_options = {
    'member-order': 'bysource',
}

autodoc_typehints = 'both'

autodoc_type_aliases = {
    'Number': 'cvmdips.typing.Number',
    'AxisName': 'cvmdips.typing.AxisName',
    'RateField': 'cvmdips.typing.RateField',
    'LayoutName': 'cvmdips.typing.LayoutName',
}

autoclass_content = 'both'

## Sphinx_RTD_Theme settings
html_theme_options = {
    'logo_only': False,
    'prev_next_buttons_location': 'bottom',
    'style_external_links': True,
    'collapse_navigation': False,
    'sticky_navigation': True,
    'navigation_depth': 4,
    'titles_only': False
}
