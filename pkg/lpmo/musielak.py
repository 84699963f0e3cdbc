"""Musielak-Orlicz growth functions, uniform Muckenhoupt conditions and the norms of L^phi and WL^phi.
"""
from __future__ import print_function, division

import math
import logging
import collections

import numpy as np
import scipy.optimize

from . import quadrature
from .quadrature import Ball, Annulus, DivergentIntegral, NonConvergence

log = logging.getLogger(__name__)

class NoFiniteNorm(RuntimeError):
    """Custom exception to indicate that no eta in the search bracket gives a modular <= 1.

    Args:
        message(str): Description of the failure.
        bracket(tuple): The (lower,upper) search bracket for eta.
    """
    def __init__(self,message,bracket):
        RuntimeError.__init__(self,'%s Searched eta in [%g,%g].' % ((message,) + tuple(bracket)))
        self.bracket = tuple(bracket)

class WeightProfile(object):
    """Power weight omega(x) = |x - center|^a, or the constant weight when a = 0.

    Weights with a <= -n are accepted but are not locally integrable, so any moment over a ball
    containing the singular point raises :class:`DivergentIntegral`.

    Args:
        dim(int): Dimension n.
        exponent(float): Exponent a.
        center(array): Location of the weight's singularity or zero, defaults to the origin.
    """
    def __init__(self,dim,exponent = 0.,center = None):
        quadrature.check_dim(dim)
        self.dim = dim
        self.exponent = float(exponent)
        self.center = np.zeros(dim) if center is None else np.array(center,dtype = float).reshape(-1)

    @property
    def is_constant(self):
        return self.exponent == 0

    def evaluate(self,points,power = 1.):
        """Evaluate omega(x)^power at points with shape (...,n)."""
        points = np.asarray(points,dtype = float)
        if self.is_constant:
            return np.ones(points.shape[:-1])
        with np.errstate(divide = 'ignore'):
            return np.linalg.norm(points - self.center,axis = -1)**(self.exponent*power)

    def moment(self,region,power = 1.,cfg = None):
        """Integral of omega^power over a ball or annulus.

        Balls that contain the singular point are integrated exactly in polar coordinates about that
        point, which reduces the integral to the sphere.

        Raises:
            DivergentIntegral: omega^power is not integrable near the singular point.
        """
        cfg = quadrature.QuadConfig() if cfg is None else cfg
        if isinstance(region,Annulus):
            outer = self.moment(Ball(region.center,region.r_out),power,cfg)
            if region.r_in == 0:
                return outer
            return outer - self.moment(Ball(region.center,region.r_in),power,cfg)
        b = self.exponent*power
        if b == 0:
            return region.volume
        offset = self.center - region.center
        distance = np.linalg.norm(offset)
        if distance > region.radius:
            return quadrature.ball_integral(lambda x: self.evaluate(x,power),region,cfg).value
        if b <= -self.dim:
            quadrature.radial_singular_integral(b + self.dim - 1,0.,region.radius)
        area = quadrature.sphere_area(self.dim)
        if distance == 0:
            return area*region.radius**(b + self.dim)/(b + self.dim)
        def reach(u):
            proj = u.dot(offset)
            return -proj + np.sqrt(np.maximum(proj**2 - distance**2 + region.radius**2,0.))
        return quadrature.sphere_integral(lambda u: reach(u)**(b + self.dim)/(b + self.dim),
            self.dim,cfg,graded = distance == region.radius).value

    def extreme(self,ball,power = 1.):
        """Essential supremum of omega^power over a ball.

        Raises:
            DivergentIntegral: The supremum is infinite.
        """
        b = self.exponent*power
        if b == 0:
            return 1.
        distance = np.linalg.norm(self.center - ball.center)
        if b > 0:
            return (distance + ball.radius)**b
        nearest = distance - ball.radius
        if nearest <= 0:
            raise DivergentIntegral('omega^%g is unbounded on %s.' % (power,ball.description()))
        return nearest**b

    def description(self):
        if self.is_constant:
            return '1'
        return '|x-(%s)|^%g' % (','.join('%g' % c for c in self.center),self.exponent)

def _power_profile(p):
    return lambda t: np.power(t,p)

def _log_profile(p):
    return lambda t: t/np.log(np.e + t)

def _log_damped_profile(p):
    return lambda t: np.power(t,p)/(1 + np.log(np.maximum(t,1.)))

# Named Orlicz profiles phi_0(t): factory of the exponent p, and the declared critical lower and
# upper type indices as functions of p.
_profiles = {
    'power': (_power_profile,lambda p: (p,p)),
    'log': (_log_profile,lambda p: (1.,1.)),
    'log_damped': (_log_damped_profile,lambda p: (p,p)),
    }

CriticalIndices = collections.namedtuple('CriticalIndices',('i_phi','I_phi','q_phi','approximate'))

class GrowthFunction(object):
    """Musielak-Orlicz growth function phi(x,t).

    Three families are supported. 'power' is omega(x)*t^p, 'orlicz' is omega(x)*phi_0(t) with
    phi_0 one of the named profiles, and 'general' wraps an arbitrary vectorized callable. The
    first two are products, which lets every measure phi(E,t) reduce to a weight moment.

    Args:
        dim(int): Dimension n.
        family(str): One of 'power', 'orlicz' or 'general'.
        p(float): Exponent of the profile in (0,1].
        weight(WeightProfile): Weight omega, defaults to the constant weight.
        profile(str): Name of the Orlicz profile for the 'orlicz' family.
        function(callable): phi(x,t) for the 'general' family, vectorized over points (N,n) and
            scales t with shape (N,) or scalar.
        indices(tuple): Declared (i,I) for the 'general' family, otherwise estimated.
        aq_class(float): Declared q with phi in A_q.

    Raises:
        RuntimeError: Invalid family or parameters.
    """
    def __init__(self,dim,family = 'power',p = 1.,weight = None,profile = 'power',function = None,
        indices = None,aq_class = None):
        quadrature.check_dim(dim)
        if not 0 < p <= 1:
            raise RuntimeError('Growth function exponent p must be in (0,1], got %r.' % (p,))
        self.dim = dim
        self.family = family
        self.p = float(p)
        self.aq_class = aq_class
        if family in ('power','orlicz'):
            if family == 'power':
                profile = 'power'
            if profile not in _profiles:
                raise RuntimeError('Unknown Orlicz profile "%s".' % profile)
            self.profile = profile
            factory,declared = _profiles[profile]
            self.phi0 = factory(self.p)
            self.indices = declared(self.p)
            self.weight = WeightProfile(dim) if weight is None else weight
            if self.weight.dim != dim:
                raise RuntimeError('Weight dimension does not match growth function dimension.')
            self.function = None
        elif family == 'general':
            if function is None:
                raise RuntimeError('The general family needs a function phi(x,t).')
            self.function = function
            self.indices = indices
            self.weight = None
            self.profile = None
        else:
            raise RuntimeError('Unknown growth function family "%s".' % family)
        if aq_class is None and self.is_product and self.weight.is_constant:
            self.aq_class = 1.

    @property
    def is_product(self):
        return self.function is None

    @property
    def power_exponent(self):
        """Exponent p when phi_0(t) = t^p exactly, else None."""
        return self.p if self.is_product and self.profile == 'power' else None

    @property
    def lower_type_p(self):
        return self.indices[0] if self.indices is not None else None

    def evaluate(self,points,t):
        """Evaluate phi(x,t) at points (N,n) and scales t (scalar or shape (N,))."""
        points = np.asarray(points,dtype = float)
        if self.is_product:
            return self.weight.evaluate(points)*self.phi0(np.asarray(t,dtype = float))
        return np.asarray(self.function(points,t),dtype = float)

    def measure(self,region,t,cfg = None,power = 1.):
        """Integral of phi(x,t)^power over a ball or annulus."""
        if self.is_product:
            return float(self.phi0(t))**power*self.weight.moment(region,power,cfg)
        cfg = quadrature.QuadConfig() if cfg is None else cfg
        return quadrature.annulus_integral(lambda x: self.evaluate(x,t)**power,region,cfg).value

    def extreme(self,ball,t,power,cfg = None):
        """Supremum of phi(x,t)^power over a ball, sampled on quadrature nodes for 'general'."""
        if self.is_product:
            return float(self.phi0(t))**power*self.weight.extreme(ball,power)
        cfg = quadrature.QuadConfig() if cfg is None else cfg
        u,_ = quadrature.panel_rule(quadrature.radial_edges(0.,ball.radius),cfg.radial_order)
        dirs,_ = quadrature.sphere_rule(ball.dim,cfg.angular_nodes)
        points = (ball.center + u[:,None,None]*dirs[None]).reshape(-1,ball.dim)
        return float(np.max(self.evaluate(points,t)**power))

    def type_constant(self,exponent,s_values,t_values,points):
        """Largest ratio phi(x,s*t)/(s^exponent*phi(x,t)) over sampled (x,s,t)."""
        worst = 0.
        for s in s_values:
            for t in t_values:
                ratio = self.evaluate(points,s*t)/(s**exponent*self.evaluate(points,t))
                worst = max(worst,float(np.max(ratio)))
        return worst

    def description(self):
        if self.family == 'general':
            return 'phi(x,t) general'
        if self.family == 'power':
            return 'phi(x,t) = %s t^%g' % (self.weight.description(),self.p)
        return 'phi(x,t) = %s %s(t;p=%g)' % (self.weight.description(),self.profile,self.p)

    @classmethod
    def from_config(cls,dim,table):
        """Create a growth function from a config dictionary.

        Recognized keys are family, p, profile, weight_exponent, weight_center and q_claim.

        Raises:
            RuntimeError: Unknown keys or invalid values.
        """
        known = ('family','p','profile','weight_exponent','weight_center','q_claim')
        unknown = set(table) - set(known)
        if unknown:
            raise RuntimeError('Unknown growth function key(s): %s.' % ', '.join(sorted(unknown)))
        family = table.get('family','power')
        if not table.get('weight_exponent',0.) > -dim:
            raise RuntimeError('Weight exponent must exceed -n = %d.' % -dim)
        if family == 'general':
            raise RuntimeError('The general family cannot be configured from a file.')
        weight = WeightProfile(dim,table.get('weight_exponent',0.),table.get('weight_center'))
        return cls(dim,family,table.get('p',1.),weight,table.get('profile','power'),
            aq_class = table.get('q_claim'))

def phi_measure(phi,region,t,cfg = None):
    """The measure phi(E,t) of a ball or annulus E."""
    return phi.measure(region,t,cfg)

def uniform_aq_constant(phi,q,balls,ts,cfg = None):
    """Largest A_q quotient of phi over a family of balls and scales.

    For q = 1 the quotient is the average of phi over B times the supremum of phi^-1 over B. For
    q > 1 it is the average of phi times the (q-1)th power of the average of phi^(-1/(q-1)).

    Returns:
        float: Lower bound for the uniform A_q constant.

    Raises:
        DivergentIntegral: A dual average or supremum is infinite.
    """
    if q < 1:
        raise RuntimeError('Need q >= 1, got %r.' % (q,))
    worst = 0.
    for ball in balls:
        for t in ts:
            average = phi.measure(ball,t,cfg)/ball.volume
            if q == 1:
                dual = phi.extreme(ball,t,-1.,cfg)
            else:
                dual = (phi.measure(ball,t,cfg,power = -1/(q - 1))/ball.volume)**(q - 1)
            worst = max(worst,average*dual)
    return worst

def estimate_type_indices(phi,points,ts,decades = 6):
    """Estimate (i,I) from sampled type inequalities.

    The local exponents log(phi(x,s*t)/phi(x,t))/log(s) are sampled for s in (0,1) and s > 1. The
    smallest exponent below one and the largest above one estimate i(phi) and I(phi).
    """
    lower = upper = None
    for s in np.geomspace(10.**-decades,0.5,8):
        for t in ts:
            exponent = np.log(phi.evaluate(points,s*t)/phi.evaluate(points,t))/math.log(s)
            lower = np.min(exponent) if lower is None else min(lower,np.min(exponent))
    for s in np.geomspace(2.,10.**decades,8):
        for t in ts:
            exponent = np.log(phi.evaluate(points,s*t)/phi.evaluate(points,t))/math.log(s)
            upper = np.max(exponent) if upper is None else max(upper,np.max(exponent))
    return float(lower),float(upper)

def _aq_bounded(phi,q,balls,cfg):
    try:
        uniform_aq_constant(phi,q,balls,[1.],cfg)
    except (DivergentIntegral,NonConvergence):
        return False
    return True

def critical_indices(phi,sample_grid = None,cfg = None,q_grid = None):
    """Critical lower type index, upper type index and weight index of a growth function.

    For product families i and I are taken from the declared profile. Otherwise they are estimated
    by :func:`estimate_type_indices` on sample_grid, a tuple (points,ts). The weight index q(phi)
    is exact (one) for constant weights. Otherwise q is scanned over q_grid on balls of radii 1,
    1/2 and 1/4 centered at the weight singularity, and the largest q with a divergent A_q quotient
    is reported, or one if none diverges.

    Returns:
        CriticalIndices: Named tuple (i_phi,I_phi,q_phi,approximate).
    """
    approximate = False
    if phi.indices is not None:
        i_phi,I_phi = phi.indices
    else:
        if sample_grid is None:
            points = np.array([[0.5] + [0.]*(phi.dim - 1),[2.] + [1.]*(phi.dim - 1)])
            ts = np.geomspace(1e-3,1e3,7)
        else:
            points,ts = sample_grid
        i_phi,I_phi = estimate_type_indices(phi,points,ts)
        approximate = True
    if phi.is_product and phi.weight.is_constant:
        return CriticalIndices(i_phi,I_phi,1.,approximate)
    q_grid = 1 + np.arange(61)/20 if q_grid is None else np.asarray(q_grid)
    center = phi.weight.center if phi.is_product else np.zeros(phi.dim)
    balls = [Ball(center,r) for r in (1.,0.5,0.25)]
    q_phi = 1.
    for q in q_grid:
        if not _aq_bounded(phi,q,balls,cfg):
            q_phi = float(q)
        else:
            break
    else:
        q_phi = np.inf
    log.debug('critical indices of %s: i=%g I=%g q=%g',phi.description(),i_phi,I_phi,q_phi)
    return CriticalIndices(i_phi,I_phi,q_phi,True)

def tail_modular(tail,phi,eta,cfg = None):
    """Integral of phi(x,tail(x)/eta) outside the tail radius.

    Closed form when phi(x,t) = |x - c|^a t^p with c the tail center, otherwise dyadic shells.
    """
    if tail.amplitude == 0:
        return 0.
    p = phi.power_exponent
    if p is not None and (phi.weight.is_constant or np.allclose(phi.weight.center,tail.center)):
        a = phi.weight.exponent
        radial = quadrature.radial_singular_integral(
            a - tail.exponent*p + phi.dim - 1,tail.radius,np.inf).value
        return (quadrature.sphere_area(phi.dim)*(tail.amplitude/eta)**p*
            tail.radius**(tail.exponent*p)*radial)
    cfg = quadrature.QuadConfig() if cfg is None else cfg
    return quadrature.dyadic_tail_integral(lambda x: phi.evaluate(x,tail.evaluate(x)/eta),
        tail.center,tail.radius,cfg).value

def modular(f,phi,eta,cfg = None):
    """The modular of f/eta, the integral of phi(x,|f(x)|/eta)."""
    centers,values = f.nonzero_cells()
    total = np.sum(phi.evaluate(centers,np.abs(values)/eta))*f.cell_volume
    if f.tail is not None:
        total += tail_modular(f.tail,phi,eta,cfg)
    return float(total)

def _bisect_norm(functional,what,bracket = (1e-12,1e12),maxiter = 200):
    lo,hi = bracket
    if functional(hi) > 1:
        raise NoFiniteNorm('The %s modular exceeds one for every eta.' % what,bracket)
    if functional(lo) <= 1:
        return lo
    root = scipy.optimize.bisect(lambda s: functional(math.exp(s)) - 1,math.log(lo),math.log(hi),
        xtol = 1e-13,maxiter = maxiter)
    return math.exp(root)

def luxemburg_norm(f,phi,cfg = None,bracket = (1e-12,1e12)):
    """Luxemburg norm of a sampled field, the least eta with modular(f,phi,eta) <= 1.

    The modular is nonincreasing in eta, so the norm is found by bisection in log(eta).

    Raises:
        NoFiniteNorm: The modular exceeds one at the top of the bracket.
    """
    if f.is_zero():
        return 0.
    if phi.is_product and f.tail is None:
        centers,values = f.nonzero_cells()
        weights = phi.weight.evaluate(centers)*f.cell_volume
        values = np.abs(values)
        return _bisect_norm(lambda eta: float(np.sum(weights*phi.phi0(values/eta))),'Luxemburg',
            bracket)
    return _bisect_norm(lambda eta: modular(f,phi,eta,cfg),'Luxemburg',bracket)

class LevelSets(object):
    """Measures phi({|f| > alpha},t) for a sampled field, exact on unions of cells.

    The candidate levels are the distinct values of |f| (where sets {|f| >= v} are used) plus a
    geometric grid of 64 levels between the smallest and largest nonzero |f| (where sets
    {|f| > alpha} are used). The grid is extended down to 1e-6 of the tail amplitude when f has
    a tail.

    Args:
        f(SampledField): The field.
        phi(GrowthFunction): Growth function.
        alpha_grid(array): Optional replacement for the geometric grid.
        cfg(QuadConfig): Settings for tail measures.
    """
    def __init__(self,f,phi,alpha_grid = None,cfg = None):
        self.phi = phi
        self.cfg = cfg
        self.tail = f.tail
        centers,values = f.nonzero_cells()
        values = np.abs(values)
        order = np.argsort(-values,kind = 'stable')
        self.values = values[order]
        self.centers = centers[order]
        self.cell_volume = f.cell_volume
        jumps = np.unique(self.values)
        if alpha_grid is None:
            positive = self.values[self.values > 0]
            lo = np.min(positive) if len(positive) else None
            hi = np.max(positive) if len(positive) else None
            if self.tail is not None and self.tail.amplitude > 0:
                lo = 1e-6*self.tail.amplitude if lo is None else min(lo,1e-6*self.tail.amplitude)
                hi = self.tail.amplitude if hi is None else max(hi,self.tail.amplitude)
            alpha_grid = np.geomspace(lo,hi,64) if lo is not None and hi > lo else np.array([])
        alpha_grid = np.asarray(alpha_grid,dtype = float)
        self.levels = np.concatenate((jumps,alpha_grid))
        # Number of cells in each level set, using >= for jumps and > for grid levels.
        ascending = self.values[::-1]
        n_cells = len(self.values)
        self.counts = np.concatenate((
            n_cells - np.searchsorted(ascending,jumps,side = 'left'),
            n_cells - np.searchsorted(ascending,alpha_grid,side = 'right')))
        if phi.is_product:
            cumulative = np.concatenate(([0.],np.cumsum(phi.weight.evaluate(self.centers))))
            self.weights = cumulative[self.counts]*self.cell_volume

    def tail_measure(self,alpha,t):
        if self.tail is None:
            return 0.
        region = self.tail.level_set(alpha)
        if region is None:
            return 0.
        return self.phi.measure(region,t,self.cfg)

    def supremum(self,eta):
        """Largest phi({|f| > alpha},alpha/eta) over candidate levels, and the maximizing alpha."""
        if len(self.levels) == 0:
            return 0.,np.nan
        if self.phi.is_product:
            values = self.phi.phi0(self.levels/eta)*self.weights
        else:
            values = np.array([np.sum(self.phi.evaluate(self.centers[:count],alpha/eta))*self.cell_volume
                for alpha,count in zip(self.levels,self.counts)])
        if self.tail is not None:
            values = values + np.array([self.tail_measure(alpha,alpha/eta) for alpha in self.levels])
        best = int(np.argmax(values))
        return float(values[best]),float(self.levels[best])

def weak_modular(f,phi,eta,alpha_grid = None,cfg = None):
    """Supremum over levels alpha of phi({|f| > alpha},alpha/eta).

    Returns:
        tuple: The supremum and the level alpha where it is attained.
    """
    return LevelSets(f,phi,alpha_grid,cfg).supremum(eta)

def weak_norm(f,phi,alpha_grid = None,cfg = None,bracket = (1e-12,1e12)):
    """Weak Musielak-Orlicz quasi-norm, the least eta with weak_modular(f,phi,eta) <= 1.

    Raises:
        NoFiniteNorm: The weak modular exceeds one at the top of the bracket.
    """
    if f.is_zero():
        return 0.
    levels = LevelSets(f,phi,alpha_grid,cfg)
    return _bisect_norm(lambda eta: levels.supremum(eta)[0],'weak',bracket)

def dilation_check(phi,q,ball,lambdas,ts,cfg = None):
    """Ratios phi(lambda*B,t)/(lambda^(nq)*phi(B,t)) on a grid of (lambda,t).

    Returns:
        numpy.ndarray: Array of shape (len(lambdas),len(ts)).
    """
    ratios = np.empty((len(lambdas),len(ts)))
    for i,factor in enumerate(lambdas):
        for j,t in enumerate(ts):
            ratios[i,j] = (phi.measure(ball.dilate(factor),t,cfg)/
                (factor**(phi.dim*q)*phi.measure(ball,t,cfg)))
    return ratios

def tail_check(phi,q,ball,ts,cfg = None):
    """Ratios of the integral of phi(x,t)/|x - x0|^(nq) outside B(x0,r) to phi(B,t)/r^(nq).

    The outside integral is closed form when the weight is constant or centered at x0, and uses
    dyadic shells with a geometric remainder otherwise.

    Raises:
        DivergentIntegral: The outside integral diverges.
        TruncationDominates: The shell remainder is too large.
    """
    if not q > 1:
        raise RuntimeError('The tail check needs q > 1, got %r.' % (q,))
    n = phi.dim
    centered = phi.is_product and (phi.weight.is_constant or np.allclose(phi.weight.center,ball.center))
    ratios = np.empty(len(ts))
    for j,t in enumerate(ts):
        if centered:
            a = phi.weight.exponent
            outside = float(phi.phi0(t))*quadrature.sphere_area(n)*quadrature.radial_singular_integral(
                a - n*q + n - 1,ball.radius,np.inf).value
        else:
            outside = quadrature.dyadic_tail_integral(
                lambda x: phi.evaluate(x,t)*np.linalg.norm(x - ball.center,axis = -1)**(-n*q),
                ball.center,ball.radius,cfg if cfg is not None else quadrature.QuadConfig()).value
        ratios[j] = outside/(phi.measure(ball,t,cfg)/ball.radius**(n*q))
    return ratios
