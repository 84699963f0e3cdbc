from __future__ import print_function, division

import os
import ast
import glob

docs = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'docs')
package = os.path.dirname(os.path.abspath(__file__))

# Dependencies with compiled parts, which are mocked when the docs are built on readthedocs.
compiled = ('numpy', 'scipy', 'astropy', 'lmfit')


def modules():
    return sorted(os.path.basename(path)[:-3] for path in glob.glob(os.path.join(package, '*.py'))
                  if not path.endswith('_test.py') and not path.endswith('__init__.py'))


def imported_names():
    names = set()
    for name in modules():
        with open(os.path.join(package, name + '.py')) as f:
            tree = ast.parse(f.read())
        for node in ast.walk(tree):
            if isinstance(node, ast.Import):
                names.update(alias.name for alias in node.names)
            elif isinstance(node, ast.ImportFrom) and node.level == 0:
                names.add(node.module)
    return names


def test_mocked_modules_match_imports():
    with open(os.path.join(docs, 'conf.py')) as f:
        tree = ast.parse(f.read())
    mocked, = [ast.literal_eval(node.value) for node in tree.body
               if isinstance(node, ast.Assign) and getattr(node.targets[0], 'id', None) == 'MOCK_MODULES']
    used = set(name for name in imported_names() if name.split('.')[0] in compiled)
    used.update(name.split('.')[0] for name in list(used))
    assert set(mocked) == used


def test_every_module_has_a_page():
    with open(os.path.join(docs, 'src', 'lpmo.rst')) as f:
        index = f.read()
    for name in modules():
        assert os.path.exists(os.path.join(docs, 'src', 'lpmo.%s.rst' % name))
        assert 'lpmo.%s\n' % name in index
