"""Atoms, atomic decompositions and the grand maximal function.
"""
from __future__ import print_function, division

import math
import logging
import itertools

import numpy as np
import scipy.signal

from . import quadrature
from . import musielak
from .field import SampledField

log = logging.getLogger(__name__)

class DegenerateProfile(RuntimeError):
    """Custom exception to indicate that moment projection annihilated an atom profile.
    """
    pass

def monomial_exponents(dim,order):
    """Multi-indices gamma with |gamma| <= order, in graded lexicographic order."""
    exponents = [ ]
    for degree in range(order + 1):
        for gamma in itertools.product(range(degree + 1),repeat = dim):
            if sum(gamma) == degree:
                exponents.append(gamma)
    return exponents

def _monomials(points,center,radius,exponents):
    scaled = (np.asarray(points) - center)/radius
    return np.stack([np.prod(scaled**np.array(gamma),axis = -1) for gamma in exponents],axis = -1)

_base_profiles = {
    'indicator': lambda u: np.ones(len(u)),
    'sign': lambda u: np.sign(u[:,0]),
    'bump': lambda u: (1 - np.sum(u*u,axis = -1))**2,
    'dipole': lambda u: u[:,0]*(1 - np.sum(u*u,axis = -1))**2,
}

def base_profile(profile_id,ball):
    """Named base profile on a ball, as a function of points.

    Profiles are written in the ball coordinates u = (x - x0)/r: 'indicator' is one, 'sign' is
    sign(u_1), 'bump' is (1 - |u|^2)^2 and 'dipole' is u_1*(1 - |u|^2)^2.

    Raises:
        RuntimeError: Unknown profile id.
    """
    try:
        profile = _base_profiles[profile_id]
    except KeyError:
        raise RuntimeError('Unknown atom profile "%s", expected one of %s.' % (
            profile_id,', '.join(sorted(_base_profiles))))
    return lambda points: profile((np.asarray(points) - ball.center)/ball.radius)

class Atom(object):
    """Multiple of a (phi,q,s)-atom sampled on a grid covering its ball.

    Args:
        ball(Ball): Ball containing the support.
        profile(SampledField): Sampled values, with support_ball set to ball.
        q(float): Integrability index in [1,inf].
        s(int): Order of the vanishing moments.
    """
    def __init__(self,ball,profile,q,s):
        if profile.support_ball is None:
            raise RuntimeError('Atom profiles need a support ball.')
        if not q >= 1:
            raise RuntimeError('Atom index q must be in [1,inf], got %r.' % (q,))
        self.ball = ball
        self.profile = profile
        self.q = float(q)
        self.s = int(s)

    @property
    def sup_bound(self):
        return self.profile.sup_norm()

    def scaled(self,factor):
        return Atom(self.ball,self.profile.scaled(factor),self.q,self.s)

    def moments(self):
        """Integrals of b(x)*(x - x0)^gamma for |gamma| <= s, keyed by gamma."""
        centers,values = self.profile.nonzero_cells()
        exponents = monomial_exponents(self.ball.dim,self.s)
        if len(values) == 0:
            return { gamma:0. for gamma in exponents }
        basis = _monomials(centers,self.ball.center,1.,exponents)
        integrals = basis.T.dot(values)*self.profile.cell_volume
        return dict(zip(exponents,integrals))

    def relative_moment(self):
        """Largest |moment_gamma|/(sup|b|*r^(n + |gamma|))."""
        sup = self.sup_bound
        if sup == 0:
            return 0.
        r,n = self.ball.radius,self.ball.dim
        return max(abs(value)/(sup*r**(n + sum(gamma))) for gamma,value in self.moments().items())

    def description(self):
        return 'atom on %s with q=%g s=%d sup=%.4g' % (self.ball.description(),self.q,self.s,
            self.sup_bound)

def indicator_norm(phi,ball,cfg = None):
    """The Luxemburg norm of the indicator of a ball, the eta with phi(B,1/eta) = 1."""
    return musielak._bisect_norm(lambda eta: phi.measure(ball,1/eta,cfg),'indicator')

def make_atom(ball,s,q,base,phi,cfg = None,ts = None):
    """Build a (phi,q,s)-atom from a base profile.

    The base profile is projected in unweighted L^2(B) onto the orthogonal complement of the
    monomials of degree <= s, then rescaled so that its (phi,q) size equals 1/|chi_B|_{L^phi}.

    Args:
        ball(Ball): The ball B.
        s(int): Moment order.
        q(float): Integrability index in [1,inf].
        base: A profile id, a vectorized function of points or a :class:`SampledField` on a grid
            covering the ball.
        phi(GrowthFunction): Growth function setting the size normalization.
        cfg(QuadConfig): Settings, cells_per_radius sets the grid.
        ts(array): Scale grid for the size supremum.

    Returns:
        Atom: The normalized atom.

    Raises:
        DegenerateProfile: Projection leaves less than 1e-10 of the profile.
    """
    cfg = quadrature.QuadConfig() if cfg is None else cfg
    if isinstance(base,SampledField):
        grid = base
    else:
        function = base_profile(base,ball) if isinstance(base,str) else base
        grid = SampledField.on_ball(ball,cfg.cells_per_radius,function)
    centers = grid.centers()
    inside = ball.contains(centers)
    values = grid.values.reshape(-1).copy()
    values[~inside] = 0.
    original = np.linalg.norm(values)
    basis = _monomials(centers[inside],ball.center,ball.radius,monomial_exponents(ball.dim,s))
    Q,_ = np.linalg.qr(basis)
    residual = values[inside]
    for _ in range(2):
        residual = residual - Q.dot(Q.T.dot(residual))
    if original == 0 or np.linalg.norm(residual) < 1e-10*original:
        raise DegenerateProfile('Moment projection of order %d annihilates the profile on %s.' % (
            s,ball.description()))
    values[inside] = residual
    field = SampledField(grid.origin,grid.cell_size,values.reshape(grid.shape),support_ball = ball)
    atom = Atom(ball,field,q,s)
    target = 1/indicator_norm(phi,ball,cfg)
    atom = atom.scaled(target/atom_size_norm(atom,phi,ts))
    log.debug('made %s',atom.description())
    return atom

def atom_size_norm(a,phi,ts = None):
    """The (phi,q) size of an atom, sup over t of [integral of |a|^q phi(x,t) over B / phi(B,t)]^(1/q).

    Both integrals are cell sums over the cells whose centers lie in B. For q = inf this is the
    sup norm. For product growth functions the bracket does not depend on t.
    """
    if math.isinf(a.q):
        return a.sup_bound
    ts = np.geomspace(1e-3,1e3,13) if ts is None else np.asarray(ts,dtype = float)
    centers = a.profile.centers()
    inside = a.ball.contains(centers)
    values = np.abs(a.profile.values.reshape(-1)[inside])**a.q
    best = 0.
    for t in ts:
        weight = phi.evaluate(centers[inside],t)
        best = max(best,float(np.sum(values*weight)/np.sum(weight)))
    return best**(1/a.q)

class Decomposition(object):
    """Finite family of atom multiples b_j = lambda_j*a_j."""
    def __init__(self,atoms):
        self.atoms = list(atoms)

    def __len__(self):
        return len(self.atoms)

    def without(self,index):
        return Decomposition(self.atoms[:index] + self.atoms[index + 1:])

    def scaled(self,factor):
        return Decomposition([atom.scaled(factor) for atom in self.atoms])

def lambda_q(d,phi,cfg = None,ts = None,bracket = (1e-12,1e12)):
    """The least eta with sum_j phi(B_j,|b_j|_{L^q_phi(B_j)}/eta) <= 1.

    Raises:
        RuntimeError: Empty decomposition.
        NoFiniteNorm: The sum exceeds one at the top of the bracket.
    """
    if len(d) == 0:
        raise RuntimeError('Lambda_q needs a nonempty decomposition.')
    sizes = [atom_size_norm(atom,phi,ts) for atom in d.atoms]
    if max(sizes) == 0:
        return 0.
    def functional(eta):
        return sum(phi.measure(atom.ball,size/eta,cfg) for atom,size in zip(d.atoms,sizes) if size > 0)
    return musielak._bisect_norm(functional,'Lambda_q',bracket)

def m_of_phi(phi,indices = None):
    """The integer m(phi) = [n*(q(phi)/i(phi) - 1)], with [s] the largest integer <= s.

    Raises:
        RuntimeError: q(phi) is infinite.
    """
    indices = musielak.critical_indices(phi) if indices is None else indices
    if math.isinf(indices.q_phi):
        raise RuntimeError('m(phi) needs a finite weight index q(phi).')
    value = phi.dim*(indices.q_phi/indices.i_phi - 1)
    return int(math.floor(value + 1e-12))

class TestDictionary(object):
    """Finite set of compactly supported bumps psi with certified S_m norms at most one.

    Bump k is c_k*(1 - |x|^2/R_k^2)_+^(m + 3), which has continuous derivatives up to order
    m + 2. The S_m norm, sup over |gamma| <= m + 1 of (1 + |x|)^((m + 2)(n + 1))|d^gamma psi(x)|,
    is maximized on a grid of spacing R_k/grid using :func:`numpy.gradient`, and c_k is chosen so
    that the grid maximum equals safety.

    Args:
        dim(int): Dimension n.
        m(int): Order m of the norm.
        radii(tuple): Support radii R_k.
        grid(int): Grid points per radius for the norm maximization.
        safety(float): Target value of the sampled norm.
    """
    # Not a pytest test class.
    __test__ = False

    def __init__(self,dim,m,radii = (0.5,1.,2.),grid = 64,safety = 0.95):
        quadrature.check_dim(dim)
        if int(m) < 0:
            raise RuntimeError('Test dictionary order must be >= 0, got %r.' % (m,))
        self.dim = dim
        self.m = int(m)
        self.radii = tuple(float(r) for r in radii)
        self.power = self.m + 3
        self.grid = grid
        self.safety = safety
        self.amplitudes = [safety/self._sampled_norm(r) for r in self.radii]

    def _raw(self,radius,points):
        u2 = np.sum(np.asarray(points)**2,axis = -1)/radius**2
        return np.clip(1 - u2,0.,None)**self.power

    def _sampled_norm(self,radius):
        step = radius/self.grid
        axis = step*np.arange(-self.grid - 2,self.grid + 3)
        mesh = np.stack(np.meshgrid(*[axis]*self.dim,indexing = 'ij'),axis = -1)
        weight = (1 + np.linalg.norm(mesh,axis = -1))**((self.m + 2)*(self.dim + 1))
        derivative = [self._raw(radius,mesh)]
        worst = np.max(weight*np.abs(derivative[0]))
        for _ in range(self.m + 1):
            derivative = [np.gradient(d,step,axis = k) for d in derivative for k in range(self.dim)]
            worst = max(worst,max(np.max(weight*np.abs(d)) for d in derivative))
        return worst

    def __len__(self):
        return len(self.radii)

    def evaluate(self,index,points):
        """Bump number index at points with shape (...,n)."""
        return self.amplitudes[index]*self._raw(self.radii[index],points)

    def subset(self,indices):
        """Dictionary restricted to some of its bumps."""
        return TestDictionary(self.dim,self.m,[self.radii[i] for i in indices],self.grid,self.safety)

    def description(self):
        return 'S_%d dictionary with radii %s' % (self.m,','.join('%g' % r for r in self.radii))

def default_offsets(dim):
    """Cone offsets in units of t: the apex and half-way points along each axis."""
    offsets = [np.zeros(dim)]
    for k in range(dim):
        for sign in (-0.5,0.5):
            o = np.zeros(dim)
            o[k] = sign
            offsets.append(o)
    return np.array(offsets)

def grand_maximal(f,dictionary,x,scales,offsets = None):
    """Lower bound of the grand maximal function f*(x).

    This is the largest |f * psi_t(y)| over bumps psi, scales t and points y = x + t*o for offsets
    o with |o| < 1, where psi_t(z) = t^-n psi(z/t). Convolutions are cell-center sums.
    """
    offsets = default_offsets(f.dim) if offsets is None else np.atleast_2d(offsets)
    if np.any(np.linalg.norm(offsets,axis = -1) >= 1):
        raise RuntimeError('Grand maximal offsets must lie in the open unit ball.')
    centers,values = f.nonzero_cells()
    if len(values) == 0:
        return 0.
    x = np.asarray(x,dtype = float)
    best = 0.
    for index in range(len(dictionary)):
        for t in scales:
            y = x + t*offsets
            psi = dictionary.evaluate(index,(y[:,None,:] - centers[None,:,:])/t)
            conv = psi.dot(values)*f.cell_volume/t**f.dim
            best = max(best,float(np.max(np.abs(conv))))
    return best

def _shifted(array,shift):
    """Array with out[i] = array[i + shift], zero where i + shift falls outside."""
    out = np.zeros_like(array)
    src = tuple(slice(max(s,0),array.shape[k] + min(s,0)) for k,s in enumerate(shift))
    dst = tuple(slice(max(-s,0),array.shape[k] + min(-s,0)) for k,s in enumerate(shift))
    out[dst] = array[src]
    return out

def _cone_shift(o,t,h):
    """Whole cell shift nearest to t*o, rounded toward zero when rounding leaves the cone |y - x| < t."""
    shift = np.rint(t*o/h)
    if np.linalg.norm(shift)*h >= t:
        shift = np.fix(t*o/h)
    return tuple(int(v) for v in shift)

def grand_maximal_field(f,dictionary,scales,offsets = None,margin = None):
    """Grand maximal lower bound at every cell center of an extended grid.

    The grid of f is padded by margin cells on every side. Each convolution f * psi_t is computed
    with :func:`scipy.signal.fftconvolve`, and offsets t*o are snapped to whole cell shifts
    that stay inside the cone.

    Returns:
        SampledField: The values of the lower bound, on the extended grid.
    """
    offsets = default_offsets(f.dim) if offsets is None else np.atleast_2d(offsets)
    margin = 2*max(f.shape) if margin is None else int(margin)
    h = f.cell_size
    padded = np.pad(f.values,margin)
    origin = f.origin - margin*h
    result = np.zeros_like(padded)
    if f.is_zero():
        return SampledField(origin,h,result)
    for index in range(len(dictionary)):
        for t in scales:
            reach = int(math.ceil(dictionary.radii[index]*t/h))
            axis = h*np.arange(-reach,reach + 1)
            mesh = np.stack(np.meshgrid(*[axis]*f.dim,indexing = 'ij'),axis = -1)
            kernel = dictionary.evaluate(index,mesh/t)*f.cell_volume/t**f.dim
            conv = np.abs(scipy.signal.fftconvolve(padded,kernel,mode = 'same'))
            for o in offsets:
                result = np.maximum(result,_shifted(conv,_cone_shift(o,t,h)))
    log.debug('grand maximal field on %s cells, max %.4g',result.shape,np.max(result))
    return SampledField(origin,h,result)

def default_scales(f,count = 8):
    """Geometric scales from two cells up to twice the support radius."""
    h = f.cell_size
    top = max(2*f.support_radius(),4*h)
    return np.geomspace(2*h,top,count)

def h_phi_quasinorm_lower(f,dictionary,phi,cfg = None,scales = None,offsets = None,margin = None):
    """Lower bound of the Hardy quasi-norm, the Luxemburg norm of :func:`grand_maximal_field`."""
    if f.is_zero():
        return 0.
    scales = default_scales(f) if scales is None else scales
    fstar = grand_maximal_field(f,dictionary,scales,offsets,margin)
    return musielak.luxemburg_norm(fstar,phi,cfg)
