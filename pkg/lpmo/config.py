"""Load and merge verification suite configurations.

A suite is a JSON document with two top-level keys::

    {
        "defaults": { "*": {...}, "decay_area": {...} },
        "checks": [ { "check": "decay_area", "params": {"rho": 1.5} }, ... ]
    }

Each check entry is merged over the built-in defaults, then the suite's '*' defaults, then the
suite's defaults for its check id. Nested tables (quad, params, phi, tolerances, options) are
merged key by key. See the :doc:`configuration page </config>` for the full schema.
"""
from __future__ import print_function, division

import copy
import json
import logging

from six import iteritems

log = logging.getLogger(__name__)

class ConfigError(RuntimeError):
    """Custom exception to indicate an invalid suite configuration.
    """
    pass

# Keys whose values are tables merged key by key rather than replaced.
_nested_keys = ('quad','params','phi','tolerances','options')

# Check ids in the order they are listed.
check_ids = (
    'cancellation','aq','dilation','tail',
    'decay_area','decay_gstar','region_breakdown','kernel_difference',
    'atom_bound_area','atom_bound_gstar','weak_atom_bound_gstar','weak_atom_bound_area',
    'superposition','weak_norm_sufficiency','oracle_equivalence',
)

# Earlier check ids, still accepted in suites and mapped to the ids above.
check_aliases = {
    'lemma22i': 'dilation',
    'lemma22ii': 'tail',
    'decay_muS': 'decay_area',
    'decay_muStar': 'decay_gstar',
    'kernel_diff_36': 'kernel_difference',
    'atom_bound_thm25': 'atom_bound_area',
    'weak_atom_bound_thm28': 'weak_atom_bound_gstar',
    'superposition_41': 'superposition',
    'weak_norm_sufficiency_42': 'weak_norm_sufficiency',
}

def resolve_check_id(check_id):
    """The current check id for a current or earlier one. Unknown ids are returned unchanged."""
    return check_aliases.get(check_id,check_id)

_ray = [64.,128.,256.,512.,1024.]

_defaults = {
    '*': {
        'dim': 2,
        'kernel': 'harmonic1',
        'phi': { 'family': 'power','p': 1. },
        'params': { 'rho': 1.5,'beta': 'auto','lam': None },
        'atoms': [ { 'center': [0.,0.],'radius': 1.,'s': 'auto','profile': 'dipole' } ],
        'quad': { },
        'tolerances': { },
        'options': { },
        'seed': 0,
    },
    'cancellation': {
        'options': { 'kernels': ['harmonic1','harmonic3','holder:0.5','holder:1'] },
        'tolerances': { 'max_ratio': 1e-8 },
    },
    'aq': {
        'phi': { 'weight_exponent': 0.5 },
        'options': { 'q': [1.3,2.,4.],'radii': [0.25,1.,4.],'ts': [1e-2,1.,1e2] },
        'tolerances': { 'max_ratio': 1e3 },
    },
    'dilation': {
        'phi': { 'weight_exponent': 0.5 },
        'options': { 'q': 'auto','lambdas': [2.,4.,8.,16.],'ts': [1e-2,1e-1,1.,10.,1e2] },
        'tolerances': { 'max_ratio': 1e3 },
    },
    'tail': {
        'phi': { 'weight_exponent': 0.5 },
        'options': { 'q': 2.,'radii': [0.5,1.,2.,4.],'ts': [1e-2,1.,1e2] },
        'tolerances': { 'stability': 1.5 },
    },
    'decay_area': {
        'options': { 'ray': _ray,'direction': [1.,1.] },
        'tolerances': { 'slope_margin': 0.1,'spread': 10. },
    },
    'decay_gstar': {
        'params': { 'lam': 3. },
        'options': { 'ray': _ray,'direction': [1.,1.] },
        'tolerances': { 'slope_margin': 0.1,'spread': 10. },
    },
    'region_breakdown': {
        'params': { 'lam': 3. },
        'options': { 'ray': _ray,'direction': [1.,1.],'operators': ['area','gstar'] },
        'tolerances': { 'partition': 1e-6 },
    },
    'kernel_difference': {
        'options': { 'kernels': ['harmonic1','holder:0.5'],'n_samples': 10000,'radius': 1. },
        'tolerances': { 'stability': 1.2 },
    },
    'atom_bound_area': {
        'phi': { 'p': 0.95 },
        'options': { 'radii': [0.5,1.,2.,4.],'decades': 4,'etas': 5,'angular_points': 16 },
        'tolerances': { 'stability': 2. },
    },
    'atom_bound_gstar': {
        'params': { 'lam': 3. },
        'phi': { 'p': 0.95 },
        'options': { 'radii': [0.5,1.,2.],'decades': 4,'etas': 5,'angular_points': 16 },
        'tolerances': { 'stability': 2. },
    },
    'weak_atom_bound_gstar': {
        'params': { 'lam': 3. },
        'phi': { 'p': 'auto' },
        'options': { 'radii': [0.5,1.,2.],'decades': 4,'etas': 5,'angular_points': 16,'levels': 48 },
        'tolerances': { 'stability': 2. },
    },
    'weak_atom_bound_area': {
        'phi': { 'p': 'auto' },
        'options': { 'radii': [0.5,1.,2.],'decades': 4,'etas': 5,'angular_points': 16,'levels': 48 },
        'tolerances': { 'stability': 2. },
    },
    'superposition': {
        'phi': { 'p': 0.5 },
        'options': { 'eta': 1.,'levels': 25,'families': {
            'single': [ { 'center': [0.,0.],'radius': 1.,'height': 1. } ],
            'pair': [ { 'center': [-2.,0.],'radius': 1.,'height': 1. },
                { 'center': [2.,0.],'radius': 1.,'height': 1. } ],
            'ladder': [ { 'center': [-3.,0.],'radius': 0.5,'height': 1. },
                { 'center': [0.,0.],'radius': 1.,'height': 2. },
                { 'center': [3.,0.],'radius': 1.5,'height': 4. } ],
            'zero': [ { 'center': [0.,0.],'radius': 1.,'height': 0. } ],
        } },
        'tolerances': { 'single_ratio': 1. + 1e-9,'max_ratio': 1e3 },
    },
    'weak_norm_sufficiency': {
        'options': { 'c_tilde': 1.,'per_decade': 200,'fields': [
            { 'kind': 'indicator','radius': 1.,'height': 1. },
            { 'kind': 'indicator','radius': 2.,'height': 2. },
            { 'kind': 'steps','radius': 1.,'height': 3. },
        ] },
        'tolerances': { },
    },
    'oracle_equivalence': {
        'params': { 'lam': 3. },
        'quad': { 'cells_per_radius': 8,'angular_nodes': 16,'radial_order': 4,'partial_nodes': 8 },
        'options': { 'configurations': [
            { 'quantity': 'inner_F','point': [3.,0.],'t': 4. },
            { 'quantity': 'inner_F','point': [1.5,1.],'t': 2. },
            { 'quantity': 'area','point': [3.,0.] },
            { 'quantity': 'area','point': [2.,2.] },
            { 'quantity': 'area','point': [80.,0.] },
            { 'quantity': 'gstar','point': [3.,0.] },
            { 'quantity': 'gstar','point': [80.,0.] },
        ] },
        'tolerances': { 'max_ratio': 1. },
    },
}

def merge(base,override):
    """Merge a check table over a base table, merging nested tables key by key.

    Neither argument is modified.
    """
    merged = copy.deepcopy(base)
    for key,value in iteritems(override):
        if key in _nested_keys and isinstance(value,dict) and isinstance(merged.get(key),dict):
            merged[key].update(copy.deepcopy(value))
        else:
            merged[key] = copy.deepcopy(value)
    return merged

def get_defaults(check_id,suite_defaults = None):
    """Get the merged default table for one check id.

    Args:
        check_id(str): The check id, or an earlier id listed in check_aliases.
        suite_defaults(dict): Optional suite-level defaults with '*' and per-check tables.

    Returns:
        dict: Dictionary of default (key,value) pairs.

    Raises:
        ConfigError: Unknown check id.
    """
    check_id = resolve_check_id(check_id)
    if check_id not in check_ids:
        raise ConfigError('Unknown check id "%s", expected one of %s.' % (check_id,', '.join(check_ids)))
    defaults = merge(_defaults['*'],_defaults[check_id])
    suite_defaults = suite_defaults or { }
    for key in ('*',check_id):
        if key in suite_defaults:
            defaults = merge(defaults,suite_defaults[key])
    return defaults

def print_defaults():
    """Print the built-in defaults of every check id."""
    for check_id in check_ids:
        print('%s: %s' % (check_id,json.dumps(get_defaults(check_id),sort_keys = True)))

def parse_suite(text,source = '<string>'):
    """Parse suite text into a list of merged check tables.

    Returns:
        list: One merged dict per check entry, each with a 'name' key.

    Raises:
        ConfigError: Invalid JSON (reported with line and column) or invalid structure.
    """
    try:
        document = json.loads(text)
    except ValueError as e:
        line,column = getattr(e,'lineno',None),getattr(e,'colno',None)
        raise ConfigError('%s:%s:%s: %s' % (source,line,column,getattr(e,'msg',str(e))))
    if not isinstance(document,dict):
        raise ConfigError('%s: suite must be a JSON object.' % source)
    unknown = set(document) - set(('defaults','checks','description'))
    if unknown:
        raise ConfigError('%s: unknown top-level key(s) %s.' % (source,', '.join(sorted(unknown))))
    suite_defaults = { }
    for key,value in iteritems(document.get('defaults',{ })):
        check_id = resolve_check_id(key)
        if check_id != '*' and check_id not in check_ids:
            raise ConfigError('%s: defaults table for unknown check id "%s".' % (source,key))
        if check_id in suite_defaults:
            raise ConfigError('%s: more than one defaults table for check id "%s".' % (source,check_id))
        suite_defaults[check_id] = value
    tables,names = [ ],set()
    for index,entry in enumerate(document.get('checks',[ ])):
        if not isinstance(entry,dict) or 'check' not in entry:
            raise ConfigError('%s: check %d: field "check" is required.' % (source,index))
        try:
            table = merge(get_defaults(entry['check'],suite_defaults),entry)
        except ConfigError as e:
            raise ConfigError('%s: check %d: field "check": %s' % (source,index,e))
        table['check'] = resolve_check_id(table['check'])
        name = table.setdefault('name','%s_%d' % (table['check'],index))
        if name in names:
            raise ConfigError('%s: check %d: field "name": duplicate name "%s".' % (source,index,name))
        names.add(name)
        table['index'] = index
        tables.append(table)
    log.info('loaded %d checks from %s',len(tables),source)
    return tables

def load_suite(filename):
    """Read a suite file and return its merged check tables.

    Raises:
        ConfigError: Unreadable file or invalid contents.
    """
    try:
        with open(filename) as f:
            text = f.read()
    except (IOError,OSError) as e:
        raise ConfigError('Unable to read suite %s: %s' % (filename,e))
    return parse_suite(text,filename)
