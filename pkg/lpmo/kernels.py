"""Rough kernels on the sphere and the operator parameters that go with them.
"""
from __future__ import print_function, division

import math
import logging
import functools

import numpy as np
import scipy.optimize
import scipy.special

from . import quadrature

log = logging.getLogger(__name__)

class KernelNotAdmissible(RuntimeError):
    """Custom exception to indicate that a kernel fails the cancellation condition.
    """
    pass

class HypothesisViolation(RuntimeError):
    """Custom exception to indicate operator parameters outside their admissible window.
    """
    pass

def unit_vectors(points):
    """Normalize points along their last axis.

    Returns:
        tuple: Arrays (directions,norms). Directions of zero vectors are zero.
    """
    points = np.asarray(points,dtype = float)
    norms = np.linalg.norm(points,axis = -1)
    safe = np.where(norms > 0,norms,1.)
    return points/safe[...,None],norms

class Kernel(object):
    """A degree-zero homogeneous kernel Omega on R^n.

    The kernel is specified by its restriction to the unit sphere. Evaluating at any nonzero
    point first projects onto the sphere, which makes Omega(c*x) = Omega(x) exact for c > 0.
    The value at the origin is defined as zero.

    Args:
        name(str): Identifier used in configs and reports.
        dim(int): Dimension n, either 2 or 3.
        profile(callable): Vectorized function of unit vectors with shape (...,n).
        alpha(float): Declared Lipschitz exponent in (0,1].
        lip_const(float): Declared Lip_alpha seminorm with respect to chordal distance.
        sup_norm(float): Declared sup norm on the sphere.
        smooth(bool): The profile is smooth on the whole sphere, so sphere integrals need no
            panels graded toward the coordinate hyperplanes.

    Raises:
        RuntimeError: Invalid dimension or exponent.
    """
    def __init__(self,name,dim,profile,alpha,lip_const = None,sup_norm = None,smooth = False):
        quadrature.check_dim(dim)
        if not 0 < alpha <= 1:
            raise RuntimeError('Kernel exponent alpha must be in (0,1], got %r.' % (alpha,))
        self.name = name
        self.dim = dim
        self.profile = profile
        self.alpha = float(alpha)
        self.lip_const = lip_const
        self.sup_norm = sup_norm
        self.smooth = smooth

    def evaluate(self,points):
        """Evaluate the kernel at points with shape (...,n)."""
        directions,norms = unit_vectors(points)
        return np.where(norms > 0,self.profile(directions),0.)

    __call__ = evaluate

    def validate(self,cfg,tolerance = 1e-8):
        """Check the cancellation condition.

        Returns:
            float: The cancellation residual.

        Raises:
            KernelNotAdmissible: Residual exceeds the tolerance.
        """
        residual = check_cancellation(self,cfg)
        if residual > tolerance:
            raise KernelNotAdmissible('Kernel "%s" has cancellation residual %.3g > %g.' % (
                self.name,residual,tolerance))
        return residual

    def description(self):
        return 'Kernel %s in R^%d with alpha=%g, |Omega|_Lip <= %s, |Omega|_inf <= %s' % (
            self.name,self.dim,self.alpha,self.lip_const,self.sup_norm)

def check_cancellation(k,cfg):
    """Absolute value of the integral of a kernel over the unit sphere.

    Raises:
        quadrature.NonConvergence: Sphere quadrature failed to converge.
    """
    return abs(quadrature.sphere_integral(k.evaluate,k.dim,cfg,graded = not k.smooth).value)

def estimate_lip_seminorm(k,n_pairs,alpha = None,seed = 0,min_separation = 1e-6):
    """Estimate the Lip_alpha seminorm of a kernel on the sphere by sampling.

    Pairs (x',y') are drawn with y' a random perturbation of x' whose size is log-uniform in
    [min_separation,2]. Distances are chordal. The random stream is consumed row by row, so the
    first n pairs are the same for any n_pairs >= n and the estimate is nondecreasing in n_pairs.

    Args:
        k(Kernel): Kernel to test.
        n_pairs(int): Number of sampled pairs.
        alpha(float): Exponent to test, defaults to the kernel's declared alpha.
        seed(int): Random seed.
        min_separation(float): Smallest perturbation size.

    Returns:
        float: Lower bound for the seminorm.
    """
    alpha = k.alpha if alpha is None else alpha
    dim = k.dim
    generator = np.random.default_rng(seed)
    draws = generator.standard_normal((n_pairs,2*dim + 1))
    x,_ = unit_vectors(draws[:,:dim])
    step,_ = unit_vectors(draws[:,dim:2*dim])
    size = np.exp(np.log(min_separation) + scipy.special.ndtr(draws[:,-1])*math.log(2/min_separation))
    y,_ = unit_vectors(x + size[:,None]*step)
    distance = np.linalg.norm(x - y,axis = -1)
    ok = distance > 0
    if not np.any(ok):
        return 0.
    ratios = np.abs(k.evaluate(x[ok]) - k.evaluate(y[ok]))/distance[ok]**alpha
    return float(np.max(ratios))

def _harmonic1(u):
    return u[...,0]

def _cos3(u):
    return 4*u[...,0]**3 - 3*u[...,0]

def _zonal2(u):
    return 0.5*(3*u[...,0]**2 - 1)

@functools.lru_cache(maxsize = None)
def _holder_offset(dim,alpha,cfg_items):
    cfg = quadrature.QuadConfig(**dict(cfg_items))
    def residual(c):
        return quadrature.sphere_integral(lambda u: np.abs(u[...,0])**alpha - c,dim,cfg,
            graded = True).value
    return scipy.optimize.brentq(residual,0.,1.,xtol = 1e-15)

def holder_offset(dim,alpha,cfg = None):
    """Constant c with |x'_1|^alpha - c integrating to zero on the sphere (by root finding)."""
    cfg = quadrature.QuadConfig() if cfg is None else cfg
    return _holder_offset(dim,float(alpha),tuple(sorted(cfg.as_dict().items())))

def holder_kernel(dim,alpha,cfg = None):
    """Kernel |x'_1|^alpha - c_alpha, which is Lip_alpha but not Lipschitz for alpha < 1."""
    offset = holder_offset(dim,alpha,cfg)
    return Kernel('holder:%g' % alpha,dim,lambda u: np.abs(u[...,0])**alpha - offset,alpha,
        lip_const = 1.,sup_norm = max(1 - offset,offset))

def kernel_from_id(kernel_id,dim,cfg = None):
    """Create a built-in kernel from its config identifier.

    Recognized ids are 'harmonic1', 'harmonic3' and 'holder:<alpha>'.

    Raises:
        RuntimeError: Unknown kernel id or bad exponent.
    """
    quadrature.check_dim(dim)
    if kernel_id == 'harmonic1':
        return Kernel('harmonic1',dim,_harmonic1,1.,lip_const = 1.,sup_norm = 1.,smooth = True)
    elif kernel_id == 'harmonic3':
        if dim == 2:
            return Kernel('harmonic3',dim,_cos3,1.,lip_const = 3.,sup_norm = 1.,smooth = True)
        return Kernel('harmonic3',dim,_zonal2,1.,lip_const = 1.5,sup_norm = 1.,smooth = True)
    elif kernel_id.startswith('holder:'):
        try:
            alpha = float(kernel_id.split(':',1)[1])
        except ValueError:
            raise RuntimeError('Invalid Holder kernel id "%s".' % kernel_id)
        return holder_kernel(dim,alpha,cfg)
    raise RuntimeError('Unknown kernel id "%s".' % kernel_id)

def builtin_kernels(dim,cfg = None):
    """Library of admissible test kernels in R^n."""
    return [kernel_from_id(kernel_id,dim,cfg) for kernel_id in ('harmonic1','harmonic3','holder:0.5')]

class OperatorParams(object):
    """Parameters (rho,beta,lambda) of the square functions.

    Args:
        dim(int): Dimension n.
        rho(float): Order rho > n/2 of the kernel |y - z|^(rho - n).
        beta(float): Decay exponent beta > 0 used by the atom estimates.
        lam(float): Exponent lambda > 2 of the g*_lambda weight, or None.

    Raises:
        HypothesisViolation: rho or lambda outside their ranges.
    """
    def __init__(self,dim,rho,beta,lam = None):
        quadrature.check_dim(dim)
        if not rho > dim/2:
            raise HypothesisViolation('Need rho > n/2 = %g, got %r.' % (dim/2,rho))
        if not beta > 0:
            raise HypothesisViolation('Need beta > 0, got %r.' % (beta,))
        if lam is not None and not lam > 2:
            raise HypothesisViolation('Need lambda > 2, got %r.' % (lam,))
        self.dim = dim
        self.rho = float(rho)
        self.beta = float(beta)
        self.lam = None if lam is None else float(lam)

    @property
    def scale_exponent(self):
        """Exponent N = n + 2*rho + 1 of the scale measure dt/t^N."""
        return self.dim + 2*self.rho + 1

    def beta_window(self,alpha,operator = 'area'):
        """Upper bound on beta for the area integral or for g*_lambda."""
        window = min(0.5,alpha,self.rho - self.dim/2)
        if operator == 'gstar':
            if self.lam is None:
                raise HypothesisViolation('The g*_lambda operator needs lambda.')
            window = min(window,(self.lam - 2)*self.dim/3)
        return window

    def check_window(self,alpha,operator = 'area'):
        """Raise :class:`HypothesisViolation` unless beta is inside its window."""
        window = self.beta_window(alpha,operator)
        if not self.beta < window:
            raise HypothesisViolation('Need beta < %g for the %s operator, got beta=%g.' % (
                window,operator,self.beta))

    def description(self):
        text = 'n=%d rho=%g beta=%g' % (self.dim,self.rho,self.beta)
        if self.lam is not None:
            text += ' lambda=%g' % self.lam
        return text
