#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# goldpart documentation build configuration file.

import sys
import os

sys.path.insert(0, os.path.abspath('../..'))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'goldpart'
copyright = 'CC0 License'
author = 'The goldpart developers'

import goldpart
version = goldpart.__version__
release = version

language = None
exclude_patterns = []
pygments_style = 'sphinx'
todo_include_todos = False

napoleon_google_docstring = False
napoleon_numpy_docstring = True

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_static_path = []
htmlhelp_basename = 'goldpartdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_documents = [
    (master_doc, 'goldpart.tex', 'goldpart Documentation',
     author, 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'goldpart', 'goldpart Documentation',
     [author], 1)
]
