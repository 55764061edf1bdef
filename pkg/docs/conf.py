# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.

import os
import sys
sys.path.append(os.path.abspath('../'))

from syncdbt import __version__

# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.viewcode',
    'numpydoc']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'syncdbt'
copyright = '2026, syncdbt developers'
author = 'syncdbt developers'

version = __version__
release = __version__

exclude_patterns = ['build', 'Thumbs.db', '.DS_Store', 'README.rst']
pygments_style = 'sphinx'
todo_include_todos = False

# numpydoc lists class members itself
numpydoc_show_class_members = False

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_sidebars = {
    '**': [
        'relations.html',
        'searchbox.html',
    ]
}
htmlhelp_basename = 'syncdbtdoc'
