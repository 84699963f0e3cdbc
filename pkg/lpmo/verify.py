"""Numerical verification checks, their reports and the suite runner.

Every check produces a table of rows (see :mod:`lpmo.output`) and a set of tolerances, which are
upper bounds on named metrics. The metrics are computed from the rows alone by :func:`summarize`
and compared against the tolerances by :func:`judge`, so a pass flag can always be re-derived
from a saved report.
"""
from __future__ import print_function, division

import os
import math
import logging
import collections
import concurrent.futures

import numpy as np

import lmfit

from . import quadrature
from . import kernels
from . import musielak
from . import operators
from . import hardy
from . import config
from . import output
from . import trace as tracing
from .quadrature import Ball, QuadConfig
from .field import SampledField, PowerTail
from .kernels import HypothesisViolation

log = logging.getLogger(__name__)

class CheckAborted(RuntimeError):
    """Custom exception to indicate that too many points of a check failed.
    """
    pass

# Largest fraction of failed points before a check is aborted.
max_failed_fraction = 0.2

descriptions = collections.OrderedDict((
    ('cancellation','Spherical mean of each kernel vanishes.'),
    ('aq','Uniform A_q constant of the growth function is finite.'),
    ('dilation','phi(lambda*B,t) <= C*lambda^(nq)*phi(B,t) over lambda and t.'),
    ('tail','Weighted tail integral outside B is bounded and stable in r.'),
    ('decay_area','Area integral of an atom decays like |x - x0|^-(n + beta).'),
    ('decay_gstar','g*_lambda of an atom decays like |x - x0|^-(n + beta).'),
    ('region_breakdown','Region partition of the square functions along the decay ray.'),
    ('kernel_difference','Sampled kernel difference ratio is stable in the sample count.'),
    ('atom_bound_area','Integral of phi(x,mu_S(b)/eta) is bounded by phi(B,|b|/eta).'),
    ('atom_bound_gstar','Integral of phi(x,g*(b)/eta) is bounded by phi(B,|b|/eta).'),
    ('weak_atom_bound_gstar','Weak modular of g*(b) is bounded by phi(B,|b|/eta).'),
    ('weak_atom_bound_area','Weak modular of mu_S(b) is bounded by phi(B,|b|/eta).'),
    ('superposition','Weak modular of a disjoint sum is bounded by the sum of weak modulars.'),
    ('weak_norm_sufficiency','A bounded weak modular at eta bounds the weak norm by C*eta.'),
    ('oracle_equivalence','Table evaluations agree with the four times finer reference.'),
))

_operators = {
    'decay_area': 'area','atom_bound_area': 'area','weak_atom_bound_area': 'area',
    'decay_gstar': 'gstar','atom_bound_gstar': 'gstar','weak_atom_bound_gstar': 'gstar',
}

_window_checks = ('decay_area','decay_gstar','region_breakdown','atom_bound_area',
    'atom_bound_gstar','weak_atom_bound_area','weak_atom_bound_gstar')

class CheckSpec(object):
    """Validated description of one check.

    Use :meth:`from_config` to build one from a merged config table. The 'auto' values of beta,
    p, the atom moment order s and the dilation index q are resolved here.

    Args:
        check(str): Check id.
        name(str): Report name.
        dim(int): Dimension n.
        kernel(Kernel): Kernel Omega.
        phi(GrowthFunction): Growth function.
        params(OperatorParams): Operator parameters.
        atoms(list): Atom tables with center, radius, s and profile.
        quad(QuadConfig): Quadrature settings.
        tolerances(dict): Upper bounds on report metrics.
        options(dict): Check-specific options.
        seed(int): Base seed for sampling checks.
        operator(str): 'area' or 'gstar', the operator the check exercises.
        index(int): Position in the suite.
    """
    def __init__(self,check,name,dim,kernel,phi,params,atoms,quad,tolerances,options,seed,operator,
        index = 0):
        self.check = check
        self.name = name
        self.dim = dim
        self.kernel = kernel
        self.phi = phi
        self.params = params
        self.atoms = atoms
        self.quad = quad
        self.tolerances = tolerances
        self.options = options
        self.seed = seed
        self.operator = operator
        self.index = index

    def description(self):
        return '%s (%s): %s, %s, %s' % (self.name,self.check,self.kernel.name,self.params.description(),
            self.phi.description())

    def parameters(self):
        """Plain dictionary of the resolved parameters, for report headers."""
        return {
            'dim': self.dim,'kernel': self.kernel.name,'phi': self.phi.description(),
            'rho': self.params.rho,'beta': self.params.beta,'lam': self.params.lam,
            'operator': self.operator,'seed': self.seed,'quad': self.quad.as_dict(),
        }

    @classmethod
    def from_config(cls,table):
        """Create a new :class:`CheckSpec` from a merged config table.

        Raises:
            ConfigError: A field is missing or invalid.
            HypothesisViolation: Parameters outside the window the check requires.
        """
        index = table.get('index',0)
        check = config.resolve_check_id(table.get('check'))
        name = table.get('name',check)
        def fail(field,message):
            raise config.ConfigError('check %d (%s): field "%s": %s' % (index,name,field,message))
        if check not in config.check_ids:
            fail('check','unknown check id "%s"' % check)
        known = ('check','name','index','dim','kernel','phi','params','atoms','quad','tolerances',
            'options','seed')
        for key in table:
            if key not in known:
                fail(key,'unknown field')
        dim = table.get('dim',2)
        try:
            quadrature.check_dim(dim)
        except RuntimeError as e:
            fail('dim',e)
        try:
            quad = QuadConfig.from_dict(table.get('quad',{ }))
        except RuntimeError as e:
            fail('quad',e)
        try:
            kernel = kernels.kernel_from_id(table.get('kernel','harmonic1'),dim,quad)
        except RuntimeError as e:
            fail('kernel',e)
        options = dict(table.get('options',{ }))
        operator = _operators.get(check)
        if check == 'region_breakdown':
            operator = 'gstar' if 'gstar' in options.get('operators',['area']) else 'area'
        params_table = dict(table.get('params',{ }))
        unknown = set(params_table) - set(('rho','beta','lam'))
        if unknown:
            fail('params','unknown key(s) %s' % ', '.join(sorted(unknown)))
        rho,beta,lam = params_table.get('rho',1.5),params_table.get('beta','auto'),params_table.get('lam')
        try:
            if beta == 'auto':
                trial = kernels.OperatorParams(dim,rho,1e-3,lam)
                beta = 0.9*trial.beta_window(kernel.alpha,operator or 'area')
            params = kernels.OperatorParams(dim,rho,beta,lam)
        except HypothesisViolation as e:
            raise HypothesisViolation('check %d (%s): %s' % (index,name,e))
        except (RuntimeError,TypeError) as e:
            fail('params',e)
        phi_table = dict(table.get('phi',{ }))
        if phi_table.get('p') == 'auto':
            phi_table['p'] = dim/(dim + params.beta)
        try:
            phi = musielak.GrowthFunction.from_config(dim,phi_table)
        except (RuntimeError,TypeError) as e:
            fail('phi',e)
        atoms = [ ]
        for k,entry in enumerate(table.get('atoms',[ ])):
            entry = dict(entry)
            unknown = set(entry) - set(('center','radius','s','profile'))
            if unknown:
                fail('atoms','entry %d has unknown key(s) %s' % (k,', '.join(sorted(unknown))))
            entry.setdefault('center',[0.]*dim)
            entry.setdefault('radius',1.)
            entry.setdefault('profile','dipole')
            if len(entry['center']) != dim or not entry['radius'] > 0:
                fail('atoms','entry %d needs a center in R^%d and a positive radius' % (k,dim))
            if entry['profile'] not in hardy._base_profiles:
                fail('atoms','entry %d has unknown profile "%s"' % (k,entry['profile']))
            if entry.get('s','auto') == 'auto':
                try:
                    entry['s'] = hardy.m_of_phi(phi)
                except RuntimeError as e:
                    fail('atoms','entry %d: %s' % (k,e))
            atoms.append(entry)
        tolerances = dict(table.get('tolerances',{ }))
        for key,value in tolerances.items():
            if not isinstance(value,(int,float)):
                fail('tolerances','"%s" must be a number' % key)
        spec = cls(check,name,dim,kernel,phi,params,atoms,quad,tolerances,options,
            int(table.get('seed',0)),operator,index)
        spec.check_hypotheses()
        return spec

    def check_hypotheses(self):
        """Raise :class:`HypothesisViolation` unless the check's parameter windows hold."""
        def violation(message):
            raise HypothesisViolation('check %d (%s): %s' % (self.index,self.name,message))
        if self.check in _window_checks:
            try:
                self.params.check_window(self.kernel.alpha,self.operator)
            except HypothesisViolation as e:
                violation(e)
        n,beta = self.dim,self.params.beta
        if self.check.startswith('atom_bound') or self.check.startswith('weak_atom_bound'):
            indices = musielak.critical_indices(self.phi,cfg = self.quad)
            p = self.phi.p
            if self.check.startswith('atom_bound'):
                if not n/(n + beta) < p <= 1:
                    violation('need p in (n/(n + beta),1] = (%g,1], got %g' % (n/(n + beta),p))
                target = p*(1 + beta/n)
                if not indices.q_phi < target:
                    violation('need phi in A_%g but q(phi) = %g' % (target,indices.q_phi))
            else:
                if abs(p - n/(n + beta)) > 1e-9:
                    violation('need p = n/(n + beta) = %g, got %g' % (n/(n + beta),p))
                if indices.q_phi != 1:
                    violation('need phi in A_1 but q(phi) = %g' % indices.q_phi)
                if not indices.I_phi < 1:
                    violation('need I(phi) < 1, got %g' % indices.I_phi)
        if self.check == 'superposition':
            indices = musielak.critical_indices(self.phi,cfg = self.quad)
            if not indices.I_phi < 1:
                violation('need I(phi) < 1, got %g' % indices.I_phi)

class CheckReport(object):
    """Outcome of one check.

    Args:
        name(str): Report name.
        check(str): Check id.
        table(astropy.table.Table): Report rows with the tolerances in its meta data.
        runtime(float): Wall time in seconds.
        error(str): Message of the error that stopped the check, if any.
    """
    def __init__(self,name,check,table,runtime,error = None):
        self.name = name
        self.check = check
        self.table = table
        self.runtime = runtime
        self.error = error
        self.metrics,self.passed = rejudge(table)

    @property
    def tolerances(self):
        return dict(self.table.meta.get('tolerances',{ }))

    def summary(self):
        return {
            'name': self.name,'check': self.check,'passed': self.passed,'runtime': self.runtime,
            'error': self.error,'rows': len(self.table),'metrics': self.metrics,
            'tolerances': self.tolerances,
        }

def _stability(values):
    """Ratio max/min of a set of values, one when all are zero and inf when only some are."""
    values = np.asarray([v for v in values if np.isfinite(v)],dtype = float)
    if len(values) == 0 or np.all(values == 0):
        return 1.
    if np.any(values <= 0):
        return np.inf
    return float(np.max(values)/np.min(values))

def fit_slope(x,y):
    """Least-squares slope of log(y) against log(x) and its standard error.

    Returns:
        tuple: (slope,stderr), with stderr nan when it cannot be estimated.
    """
    model = lmfit.models.LinearModel()
    logx,logy = np.log(np.asarray(x,dtype = float)),np.log(np.asarray(y,dtype = float))
    params = model.guess(logy,x = logx)
    result = model.fit(logy,params,x = logx)
    stderr = result.params['slope'].stderr
    return float(result.params['slope'].value),float(stderr) if stderr is not None else np.nan

def _groups(table,*keys):
    groups = collections.OrderedDict()
    for k,row in enumerate(table):
        groups.setdefault(tuple(row[key] for key in keys),[ ]).append(k)
    return groups

def summarize(check,table):
    """Compute the metrics of a report from its rows alone.

    Every check gets 'max_ratio' and 'failed_fraction'. Checks add 'stability', 'eta_stability',
    'slope', 'slope_stderr', 'spread', 'partition', 'single_ratio', 'argmax_fraction' or
    'flip_error' as they need.
    """
    check = check or ''
    ratio = np.asarray(table['ratio'],dtype = float)
    finite = ~np.isnan(ratio)
    metrics = {
        'max_ratio': float(np.max(ratio[finite])) if np.any(finite) else 0.,
        'failed_fraction': float(np.mean(~np.asarray(table['passed'],dtype = bool))) if len(table) else 0.,
    }
    if len(table) == 0:
        return metrics
    if check == 'tail':
        metrics['stability'] = max(_stability(ratio[rows]) for rows in _groups(table,'param').values())
    elif check == 'kernel_difference':
        metrics['stability'] = max(_stability(ratio[rows]) for rows in _groups(table,'case').values())
    elif check.startswith('atom_bound') or check.startswith('weak_atom_bound'):
        # Stability spans every (radius,eta) ratio.
        metrics['stability'] = _stability(ratio)
        metrics['eta_stability'] = max(_stability(ratio[rows]) for rows in _groups(table,'case').values())
        if check.startswith('weak'):
            metrics['argmax_fraction'] = float(np.nanmax(np.asarray(table['point'],dtype = float)))
    elif check == 'aq':
        flips = [abs(table['value'][k] - table['point'][k]) for k in range(len(table))
            if table['case'][k] == 'flip']
        if flips:
            metrics['flip_error'] = float(max(flips))
    elif check == 'weak_norm_sufficiency':
        metrics['stability'] = _stability(ratio)
    elif check.startswith('decay'):
        slopes,errors,spreads = [ ],[ ],[ ]
        for rows in _groups(table,'case').values():
            value = np.asarray(table['value'][rows],dtype = float)
            point = np.asarray(table['point'][rows],dtype = float)
            good = np.isfinite(value) & (value > 0)
            spreads.append(_stability(ratio[rows]))
            if np.count_nonzero(good) >= 2:
                slope,stderr = fit_slope(point[good],value[good])
                slopes.append(slope)
                errors.append(stderr)
        metrics['slope'] = max(slopes) if slopes else -np.inf
        metrics['slope_stderr'] = max(errors) if errors else np.nan
        metrics['spread'] = max(spreads)
    elif check == 'region_breakdown':
        worst = 0.
        for rows in _groups(table,'case','point').values():
            total = [table['value'][k] for k in rows if table['param_name'][k] == 'total']
            parts = [table['value'][k]**2 for k in rows if table['param_name'][k] != 'total']
            if total and total[0] > 0:
                worst = max(worst,abs(sum(parts) - total[0]**2)/total[0]**2)
        metrics['partition'] = float(worst)
    elif check == 'superposition':
        single = [r for r,case in zip(ratio,table['case']) if str(case).startswith('single')]
        metrics['single_ratio'] = float(max(single)) if single else 0.
    return metrics

def judge(metrics,tolerances):
    """Pass flag: every tolerance bounds its metric, and at most 20% of the points failed."""
    if not metrics.get('failed_fraction',0.) <= max_failed_fraction:
        return False
    for key,bound in tolerances.items():
        value = metrics.get(key)
        if value is None or not value <= bound:
            return False
    return True

def rejudge(table):
    """Metrics and pass flag of a report table, from its rows and meta data alone."""
    check = table.meta.get('check')
    metrics = summarize(check,table)
    passed = judge(metrics,table.meta.get('tolerances',{ })) and not table.meta.get('error')
    return metrics,passed

class _Points(object):
    """Bookkeeping of failed points within a check."""
    def __init__(self,name):
        self.name = name
        self.total = 0
        self.failed = 0

    def attempt(self,function,*args,**kwargs):
        self.total += 1
        try:
            return function(*args,**kwargs)
        except RuntimeError as e:
            self.failed += 1
            log.warning('%s: point failed: %s',self.name,e)
            return None

    def check(self):
        if self.total and self.failed > max_failed_fraction*self.total:
            raise CheckAborted('%s: %d of %d points failed.' % (self.name,self.failed,self.total))

def _unit(direction,dim):
    direction = np.asarray(direction,dtype = float)
    if direction.shape != (dim,) or not np.linalg.norm(direction) > 0:
        raise RuntimeError('Ray direction must be a nonzero vector in R^%d.' % dim)
    return direction/np.linalg.norm(direction)

def _atoms(spec):
    """Atoms of a check, one per atom entry and per radius in options['radii'] if given."""
    radii = spec.options.get('radii')
    atoms = [ ]
    for k,entry in enumerate(spec.atoms):
        for radius in (radii if radii is not None else [entry['radius']]):
            ball = Ball(entry['center'],radius)
            atom = hardy.make_atom(ball,entry['s'],np.inf,entry['profile'],spec.phi,spec.quad)
            atoms.append(('%s_r%g_%d' % (entry['profile'],radius,k),atom))
    return atoms

def _square_function(table,operator,x,regions = False):
    return table.area(x,regions = regions) if operator == 'area' else table.gstar(x,regions = regions)

def run_cancellation_check(spec,trace):
    rows = [ ]
    for kernel_id in spec.options.get('kernels',[spec.kernel.name]):
        k = kernels.kernel_from_id(kernel_id,spec.dim,spec.quad)
        residual = kernels.check_cancellation(k,spec.quad)
        rows.append((kernel_id,0.,'alpha',k.alpha,residual,np.nan,residual,True))
        trace(kernel_id)
    return rows,{ }

def _weight_center(spec):
    weight = spec.phi.weight
    return weight.center if weight is not None and weight.center is not None else np.zeros(spec.dim)

def _aq_flip(spec,step):
    """Smallest q on a grid of the given step whose A_q quotient about the weight center is finite."""
    center = _weight_center(spec)
    balls = [Ball(center,r) for r in (1.,0.5,0.25)]
    for q in 1 + step*np.arange(int(round(3/step)) + 1):
        try:
            musielak.uniform_aq_constant(spec.phi,q,balls,[1.],spec.quad)
        except (quadrature.DivergentIntegral,quadrature.NonConvergence):
            continue
        return float(q)
    return np.inf

def run_aq_check(spec,trace):
    """A_q quotients over balls and scales, and where they first become finite.

    For a weight |x - c|^a the quotient is finite exactly for q > 1 + max(a,0)/n. The 'flip' row
    holds that value as its point and the measured flip as its value, and the check bounds their
    difference by the grid step.
    """
    center = _weight_center(spec)
    radii = spec.options.get('radii',[1.])
    offset = np.zeros(spec.dim)
    offset[0] = 1.
    balls = [Ball(center,r) for r in radii] + [Ball(center + 1.5*r*offset,r) for r in radii]
    indices = musielak.critical_indices(spec.phi,cfg = spec.quad)
    rows = [ ]
    for q in spec.options.get('q',[2.]):
        try:
            value = musielak.uniform_aq_constant(spec.phi,q,balls,spec.options.get('ts',[1.]),spec.quad)
            passed = True
        except (quadrature.DivergentIntegral,quadrature.NonConvergence):
            value,passed = np.inf,False
        rows.append(('q=%g' % q,q,'q',q,value,np.nan,value,passed))
        trace('q=%g' % q)
    extra = { 'q_phi': indices.q_phi,'i_phi': indices.i_phi,'I_phi': indices.I_phi }
    if spec.phi.is_product:
        step = float(spec.options.get('flip_step',0.05))
        expected = 1 + max(spec.phi.weight.exponent,0.)/spec.dim
        flip = _aq_flip(spec,step)
        bound = step*(1 + 1e-9)
        rows.append(('flip',expected,'q',flip,flip,np.nan,np.nan,abs(flip - expected) <= bound))
        extra['flip_error'] = bound
        trace('flip')
    return rows,extra

def _dilation_index(spec):
    q = spec.options.get('q','auto')
    if q != 'auto':
        return float(q)
    if spec.phi.aq_class is not None:
        return float(spec.phi.aq_class)
    q_phi = musielak.critical_indices(spec.phi,cfg = spec.quad).q_phi
    return 1. if q_phi == 1 else q_phi + 0.05

def run_dilation_check(spec,trace):
    q = _dilation_index(spec)
    center = _weight_center(spec)
    offset = np.zeros(spec.dim)
    offset[0] = 2.
    lambdas = spec.options.get('lambdas',[2.,4.,8.,16.])
    ts = spec.options.get('ts',[1.])
    rows = [ ]
    for label,ball in (('centered',Ball(center,1.)),('shifted',Ball(center + offset,1.))):
        ratios = musielak.dilation_check(spec.phi,q,ball,lambdas,ts,spec.quad)
        for i,factor in enumerate(lambdas):
            for j,t in enumerate(ts):
                rows.append((label,factor,'t',t,ratios[i,j],np.nan,ratios[i,j],True))
        trace(label)
    return rows,{ 'q': q }

def run_tail_check(spec,trace):
    q = float(spec.options.get('q',2.))
    center = _weight_center(spec)
    ts = spec.options.get('ts',[1.])
    rows = [ ]
    for r in spec.options.get('radii',[1.]):
        ratios = musielak.tail_check(spec.phi,q,Ball(center,r),ts,spec.quad)
        for t,ratio in zip(ts,ratios):
            rows.append(('r=%g' % r,r,'t',t,ratio,np.nan,ratio,True))
        trace('r=%g' % r)
    return rows,{ 'q': q }

def run_decay_check(spec,trace):
    """Normalized square function of atoms along a geometric ray of points outside 64B.

    The ratio is mu(b)(x)*|x - x0|^(n + beta)/(|b|_inf*r^(n + beta)); the slope of log(mu) against
    log|x - x0| is fitted per atom.
    """
    exponent = spec.dim + spec.params.beta
    direction = _unit(spec.options.get('direction',[1.] + [0.]*(spec.dim - 1)),spec.dim)
    factors = np.asarray(spec.options.get('ray',[64.,128.,256.,512.,1024.]),dtype = float)
    if np.any(factors < 64):
        raise HypothesisViolation('Decay points must lie outside 64B.')
    points = _Points(spec.name)
    rows = [ ]
    for label,atom in _atoms(spec):
        x0,r,sup = atom.ball.center,atom.ball.radius,atom.sup_bound
        xs = x0 + factors[:,None]*r*direction
        table = operators.SquareFunction(atom.profile,spec.kernel,spec.params,spec.quad,points = xs)
        trace('table %s' % label)
        for factor,x in zip(factors,xs):
            result = points.attempt(_square_function,table,spec.operator,x)
            if result is None:
                rows.append((label,factor,'distance',factor*r,np.nan,np.nan,np.nan,False))
                continue
            ratio = result.value*factor**exponent/sup if sup > 0 else 0.
            rows.append((label,factor,'distance',factor*r,result.value,result.est_error,ratio,True))
        points.check()
    tolerances = { 'slope': -exponent + spec.tolerances.pop('slope_margin',0.1) }
    return rows,tolerances

def run_region_breakdown_check(spec,trace):
    """Region parts of the square functions along the decay ray, normalized like the decay ratio."""
    exponent = spec.dim + spec.params.beta
    direction = _unit(spec.options.get('direction',[1.] + [0.]*(spec.dim - 1)),spec.dim)
    factors = np.asarray(spec.options.get('ray',[64.,256.,1024.]),dtype = float)
    if np.any(factors < 64):
        raise HypothesisViolation('Region breakdowns need points outside 64B.')
    names = { 'area': ('I1','I2','I3'),'gstar': ('cone','J1','J2','J3') }
    points = _Points(spec.name)
    rows = [ ]
    for label,atom in _atoms(spec):
        x0,r,sup = atom.ball.center,atom.ball.radius,atom.sup_bound
        xs = x0 + factors[:,None]*r*direction
        table = operators.SquareFunction(atom.profile,spec.kernel,spec.params,spec.quad,points = xs)
        trace('table %s' % label)
        for operator in spec.options.get('operators',['area']):
            case = '%s %s' % (label,operator)
            for factor,x in zip(factors,xs):
                result = points.attempt(_square_function,table,operator,x,True)
                if result is None:
                    rows.append((case,factor,'total',0.,np.nan,np.nan,np.nan,False))
                    continue
                scale = factor**exponent/sup if sup > 0 else 0.
                rows.append((case,factor,'total',0.,result.value,result.est_error,result.value*scale,True))
                for k,name in enumerate(names[operator]):
                    part = result.region_breakdown[name]
                    rows.append((case,factor,name,k + 1.,part,np.nan,part*scale,True))
        points.check()
    return rows,{ }

def run_kernel_difference_check(spec,trace):
    count = int(spec.options.get('n_samples',10000))
    ball = Ball(np.zeros(spec.dim),spec.options.get('radius',1.))
    rows = [ ]
    for kernel_id in spec.options.get('kernels',[spec.kernel.name]):
        k = kernels.kernel_from_id(kernel_id,spec.dim,spec.quad)
        for n_samples in (count,2*count):
            value = operators.kernel_difference_bound_check(k,spec.params.rho,ball,n_samples,spec.seed)
            rows.append((kernel_id,n_samples,'n_samples',n_samples,value,np.nan,value,True))
        trace(kernel_id)
    return rows,{ }

def _far_grid(ball,order,angular_points,outer = 1024.):
    """Polar quadrature nodes and weights about the ball center out to outer*r."""
    r = ball.radius
    edges = np.concatenate(([0.],r*2.**np.arange(-4,int(math.log2(outer)) + 1)))
    u,wu = quadrature.panel_rule(edges,order)
    dirs,wd,_ = quadrature.periodic_sphere_rule(ball.dim,angular_points)
    nodes = (ball.center + u[:,None,None]*dirs[None,:,:]).reshape(-1,ball.dim)
    weights = ((wu*u**(ball.dim - 1))[:,None]*wd[None,:]).reshape(-1)
    return nodes,weights,edges[-1]

def _far_field(spec,atom,points,trace,label):
    """Square function of an atom on the far grid, and the power tail that bounds it beyond."""
    exponent = spec.dim + spec.params.beta
    nodes,weights,outer = _far_grid(atom.ball,spec.quad.radial_order,
        int(spec.options.get('angular_points',16)))
    table = operators.SquareFunction(atom.profile,spec.kernel,spec.params,spec.quad,points = nodes)
    trace('table %s' % label)
    values = np.empty(len(nodes))
    for k,x in enumerate(nodes):
        result = points.attempt(_square_function,table,spec.operator,x)
        values[k] = np.nan if result is None else result.value
    points.check()
    good = np.isfinite(values)
    values = np.where(good,values,0.)
    weights = np.where(good,weights,0.)
    distance = np.linalg.norm(nodes - atom.ball.center,axis = -1)
    shell = good & (distance >= outer/2)
    decay = float(np.max(values[shell]*distance[shell]**exponent)) if np.any(shell) else 0.
    tail = PowerTail(atom.ball.center,outer,decay*outer**(-exponent),exponent)
    return nodes,weights,values,tail

def _etas(spec,atom):
    decades = float(spec.options.get('decades',4))
    scale = atom.sup_bound*atom.ball.volume
    return scale*10.**np.linspace(-decades/2,decades/2,int(spec.options.get('etas',5)))

def run_atom_bound_check(spec,trace):
    """Ratio of the integral of phi(x,mu(b)(x)/eta) to phi(B,|b|_inf/eta) over eta and atoms.

    The integral covers |x - x0| <= 1024r with polar quadrature. Beyond, mu(b) is bounded by the
    decay constant measured on the outermost shell and the power tail integral is closed form.
    """
    points = _Points(spec.name)
    rows = [ ]
    for label,atom in _atoms(spec):
        nodes,weights,values,tail = _far_field(spec,atom,points,trace,label)
        for eta in _etas(spec,atom):
            inner = float(np.sum(weights*spec.phi.evaluate(nodes,values/eta)))
            far = musielak.tail_modular(tail,spec.phi,eta,spec.quad)
            bound = spec.phi.measure(atom.ball,atom.sup_bound/eta,spec.quad)
            rows.append((label,atom.ball.radius,'eta',eta,inner + far,np.nan,(inner + far)/bound,True))
    return rows,{ }

def run_weak_atom_bound_check(spec,trace):
    """Ratio of sup over alpha of phi({mu(b) > alpha},alpha/eta) to phi(B,|b|_inf/eta).

    Level sets are unions of far grid cells plus the level annulus of the bounding power tail.
    The point column holds the maximizing alpha divided by |b|_inf.
    """
    points = _Points(spec.name)
    rows = [ ]
    for label,atom in _atoms(spec):
        nodes,weights,values,tail = _far_field(spec,atom,points,trace,label)
        top = float(np.max(values))
        levels = np.geomspace(1e-4*top,top,int(spec.options.get('levels',48))) if top > 0 else [ ]
        sup = atom.sup_bound
        for eta in _etas(spec,atom):
            best,argmax = 0.,0.
            for alpha in levels:
                inside = values > alpha
                measure = float(np.sum(weights[inside]*spec.phi.evaluate(nodes[inside],alpha/eta)))
                region = tail.level_set(alpha)
                if region is not None:
                    measure += spec.phi.measure(region,alpha/eta,spec.quad)
                if measure > best:
                    best,argmax = measure,alpha
            bound = spec.phi.measure(atom.ball,sup/eta,spec.quad)
            rows.append((label,argmax/sup,'eta',eta,best,np.nan,best/bound,True))
    tolerances = { }
    if spec.phi.power_exponent is not None:
        # The maximizing alpha must lie strictly below |b|_inf.
        tolerances['argmax_fraction'] = float(np.nextafter(1.,0.))
    return rows,tolerances

def _level_measure(f,phi,level,t):
    centers,values = f.nonzero_cells()
    inside = np.abs(values) > level
    return float(np.sum(phi.evaluate(centers[inside],t)))*f.cell_volume

def run_superposition_check(spec,trace):
    """Ratio of phi({sum|f_j| > beta},beta/eta) to the sum over j of the weak modulars of f_j.

    Families are disjoint indicator disks, so the level set of the sum is the union of the level
    sets of the terms.
    """
    eta = float(spec.options.get('eta',1.))
    cells = spec.quad.cells_per_radius
    rows = [ ]
    for name,disks in sorted(spec.options.get('families',{ }).items()):
        for a in range(len(disks)):
            for b in range(a):
                gap = np.linalg.norm(np.subtract(disks[a]['center'],disks[b]['center']))
                if gap < disks[a]['radius'] + disks[b]['radius']:
                    raise RuntimeError('Superposition family "%s" has overlapping disks.' % name)
        fields = [SampledField.on_ball(Ball(d['center'],d['radius']),cells).scaled(d['height'])
            for d in disks]
        rhs = sum(musielak.weak_modular(f,spec.phi,eta,cfg = spec.quad)[0] for f in fields)
        heights = [abs(d['height']) for d in disks if d['height'] != 0]
        betas = np.geomspace(1e-2*min(heights),max(heights),int(spec.options.get('levels',25))) if heights else [1.]
        for beta in betas:
            lhs = sum(_level_measure(f,spec.phi,beta,beta/eta) for f in fields)
            ratio = lhs/rhs if rhs > 0 else 0.
            rows.append((name,beta,'beta',beta,lhs,np.nan,ratio,True))
        trace(name)
    return rows,{ }

def _sufficiency_field(entry,cells,dim):
    ball = Ball(np.zeros(dim),entry.get('radius',1.))
    height = entry.get('height',1.)
    if entry.get('kind','indicator') == 'indicator':
        return SampledField.on_ball(ball,cells).scaled(height)
    elif entry['kind'] == 'steps':
        def profile(x):
            u = np.linalg.norm(x,axis = -1)/ball.radius
            return height*np.where(u < 1/3,1.,np.where(u < 2/3,0.5,0.25))
        return SampledField.on_ball(ball,cells,profile)
    raise RuntimeError('Unknown field kind "%s".' % entry['kind'])

def run_weak_norm_sufficiency_check(spec,trace):
    """Smallest lattice eta with weak modular at most c_tilde, against the weak norm.

    The lattice is 10^(k/per_decade). With lower type index i(phi), the weak norm is at most
    max(1,c_tilde)^(1/i) times that eta, which sets the max_ratio tolerance.
    """
    c_tilde = float(spec.options.get('c_tilde',1.))
    per_decade = int(spec.options.get('per_decade',200))
    i_phi = musielak.critical_indices(spec.phi,cfg = spec.quad).i_phi
    rows = [ ]
    for k,entry in enumerate(spec.options.get('fields',[ ])):
        label = '%s_r%g_h%g_%d' % (entry.get('kind','indicator'),entry.get('radius',1.),
            entry.get('height',1.),k)
        f = _sufficiency_field(entry,spec.quad.cells_per_radius,spec.dim)
        weak = musielak.weak_norm(f,spec.phi,cfg = spec.quad)
        levels = musielak.LevelSets(f,spec.phi,cfg = spec.quad)
        centre = int(math.floor(per_decade*math.log10(weak)))
        lattice = 10.**(np.arange(centre - 3*per_decade,centre + 3*per_decade + 1)/per_decade)
        admissible = [eta for eta in lattice if levels.supremum(eta)[0] <= c_tilde]
        eta0 = admissible[0] if admissible else np.nan
        rows.append((label,eta0,'eta0',eta0,weak,np.nan,weak/eta0,bool(admissible)))
        trace(label)
    return rows,{ 'max_ratio': max(1.,c_tilde)**(1/i_phi)*(1 + 1e-9) }

def run_oracle_equivalence_check(spec,trace):
    """Table evaluations against the four times finer reference on a reference atom.

    The ratio is |value - reference|/max(2*rel_tol*|reference|,10*abs_tol) with the tolerances of
    the check's quadrature settings. The point column holds the reference value.
    """
    entry = spec.atoms[0]
    atom = hardy.make_atom(Ball(entry['center'],entry['radius']),entry['s'],np.inf,entry['profile'],
        spec.phi,spec.quad)
    f,k,cfg = atom.profile,spec.kernel,spec.quad
    rows = [ ]
    for index,item in enumerate(spec.options.get('configurations',[ ])):
        quantity,x = item['quantity'],np.asarray(item['point'],dtype = float)
        if quantity == 'inner_F':
            value = operators.inner_F(f,k,spec.params.rho,x,item['t'],cfg)
            reference = operators.brute_force_inner_F(f,k,spec.params.rho,x,item['t'],cfg)
            est_error = 0.
        elif quantity in ('area','gstar'):
            table = operators.SquareFunction(f,k,spec.params,cfg,points = [x])
            result = _square_function(table,quantity,x)
            value,est_error = result.value,result.est_error
            reference = operators.brute_force_mu(f,k,spec.params,x,cfg,quantity).value
        else:
            raise RuntimeError('Unknown oracle quantity "%s".' % quantity)
        allowed = max(2*cfg.rel_tol*abs(reference),10*cfg.abs_tol)
        rows.append(('%s_%d' % (quantity,index),reference,'t' if quantity == 'inner_F' else 'x1',
            item.get('t',x[0]),value,est_error,abs(value - reference)/allowed,True))
        trace('%s %d' % (quantity,index))
    return rows,{ 'rel_tol': cfg.rel_tol,'abs_tol': cfg.abs_tol }

_runners = {
    'cancellation': run_cancellation_check,
    'aq': run_aq_check,
    'dilation': run_dilation_check,
    'tail': run_tail_check,
    'decay_area': run_decay_check,
    'decay_gstar': run_decay_check,
    'region_breakdown': run_region_breakdown_check,
    'kernel_difference': run_kernel_difference_check,
    'atom_bound_area': run_atom_bound_check,
    'atom_bound_gstar': run_atom_bound_check,
    'weak_atom_bound_gstar': run_weak_atom_bound_check,
    'weak_atom_bound_area': run_weak_atom_bound_check,
    'superposition': run_superposition_check,
    'weak_norm_sufficiency': run_weak_norm_sufficiency_check,
    'oracle_equivalence': run_oracle_equivalence_check,
}

def run_check(table,trace = None):
    """Run one check from its merged config table and return its :class:`CheckReport`.

    Errors raised while the check runs are recorded in the report, which then fails.
    """
    spec = CheckSpec.from_config(table)
    timer = tracing.Timer(trace)
    log.info('running %s',spec.description())
    error,rows,extra = None,[ ],{ }
    try:
        rows,extra = _runners[spec.check](spec,timer)
    except RuntimeError as e:
        error = str(e)
        log.error('%s failed: %s',spec.name,error)
    # Runners may turn tolerances into bounds (the decay slope margin) and add their own.
    tolerances = dict(spec.tolerances)
    for key,value in extra.items():
        if key in ('slope','argmax_fraction','max_ratio','flip_error'):
            tolerances.setdefault(key,value)
    meta = {
        'check': spec.check,'name': spec.name,'tolerances': tolerances,
        'parameters': spec.parameters(),'extra': { key:float(value) for key,value in extra.items() },
        'error': error,
    }
    report = CheckReport(spec.name,spec.check,output.make_table(spec.check,rows,meta),timer.elapsed(),
        error)
    log.info('%s %s in %.1fs',spec.name,'passed' if report.passed else 'FAILED',report.runtime)
    return report

def worker_count(n_checks,max_workers = None):
    """Number of worker processes, capped by LPMO_MAX_WORKERS and the number of checks."""
    if max_workers is None:
        env = os.environ.get('LPMO_MAX_WORKERS')
        max_workers = int(env) if env else (os.cpu_count() or 1)
    return max(1,min(int(max_workers),n_checks))

def run_suite(tables,writer,max_workers = None,trace = None,seed = None):
    """Run every check of a suite and write the reports.

    All specs are validated before any check runs. Checks run in a process pool and reports are
    collected and written in suite order. On KeyboardInterrupt the completed reports and a summary
    are flushed before the interrupt propagates.

    Args:
        tables(list): Merged check tables from :func:`lpmo.config.load_suite`.
        writer(lpmo.output.Writer): Report writer.
        max_workers(int): Worker cap, defaults to LPMO_MAX_WORKERS or the CPU count.
        trace(callable): Checkpoint callable, only used when checks run in this process.
        seed(int): Override of every check's seed.

    Returns:
        tuple: Exit code (0 when every check passed) and the list of reports.
    """
    if seed is not None:
        tables = [dict(table,seed = seed) for table in tables]
    for table in tables:
        CheckSpec.from_config(table)
    workers = worker_count(len(tables),max_workers)
    reports = [ ]
    try:
        if workers <= 1:
            for table in tables:
                report = run_check(table,trace)
                writer.write(report)
                reports.append(report)
        else:
            with concurrent.futures.ProcessPoolExecutor(workers) as pool:
                futures = [pool.submit(run_check,table) for table in tables]
                for future in futures:
                    report = future.result()
                    writer.write(report)
                    reports.append(report)
    except KeyboardInterrupt:
        log.warning('interrupted after %d of %d checks, flushing reports',len(reports),len(tables))
        writer.finalize(reports,interrupted = True)
        raise
    summary = writer.finalize(reports)
    for name in summary['failed']:
        log.warning('check %s failed',name)
    return (0 if summary['passed'] else 1),reports
