# -*- coding: utf-8 -*-
# Sphinx configuration for the lpmo documentation.

import sys
import os

# on_rtd is whether we are on readthedocs.org
on_rtd = os.environ.get('READTHEDOCS', None) == 'True'

from mock import Mock as MagicMock

class Mock(MagicMock):
    @classmethod
    def __getattr__(cls, name):
        return Mock()

# Compiled dependencies are mocked on readthedocs so that autodoc can import lpmo.
MOCK_MODULES = [
    'numpy',
    'scipy',
    'scipy.special',
    'scipy.optimize',
    'scipy.interpolate',
    'scipy.signal',
    'astropy',
    'astropy.table',
    'lmfit',
]
if on_rtd:
    sys.modules.update((mod_name, Mock()) for mod_name in MOCK_MODULES)

sys.path.insert(0, os.path.abspath('..'))

import lpmo

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
    'sphinxcontrib.napoleon',
]

source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build']

project = u'lpmo'
copyright = u'lpmo developers'
release = lpmo.__version__
version = release.replace('dev', '')

pygments_style = 'sphinx'

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'astropy': ('https://docs.astropy.org/en/stable/', None),
}

# RTD has its own theme.
html_theme = 'default' if on_rtd else 'sphinxdoc'
htmlhelp_basename = 'lpmodoc'
