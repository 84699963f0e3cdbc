"""Geometric primitives and the quadrature engine shared by all other modules.

Integrals are computed with fixed tensor-product rules (Gauss-Legendre panels in the radial and
scale variables, graded Gauss-Legendre panels on the sphere) that are refined by doubling until
successive values agree to within the configured tolerance. All rules are deterministic: a given
:class:`QuadConfig` always produces the same nodes in the same order, and reductions use
:func:`numpy.sum` (pairwise summation).
"""
from __future__ import print_function, division

import math
import inspect
import logging
import functools

import numpy as np
import scipy.special

log = logging.getLogger(__name__)

class NonConvergence(RuntimeError):
    """Custom exception to indicate that a quadrature exhausted its refinements.
    """
    pass

class DivergentIntegral(RuntimeError):
    """Custom exception to indicate that a requested integral does not converge.
    """
    pass

class TruncationDominates(RuntimeError):
    """Custom exception to indicate that a truncated-domain error estimate is too large.
    """
    pass

def check_dim(dim):
    """Check that a dimension is supported.

    Raises:
        RuntimeError: Dimension is not 2 or 3.
    """
    if dim not in (2,3):
        raise RuntimeError('Only dimensions n = 2 or 3 are supported, got %r.' % (dim,))

def sphere_area(dim):
    """Surface measure of the unit sphere S^{n-1}."""
    return 2*math.pi**(0.5*dim)/scipy.special.gamma(0.5*dim)

def ball_volume(dim,radius):
    """Lebesgue measure of a ball of the given radius in R^n."""
    return sphere_area(dim)*radius**dim/dim

class Ball(object):
    """Open ball B(x,r) = {y : |x - y| < r}.

    Args:
        center(array): Center point in R^n.
        radius(float): Radius, which must be positive.

    Raises:
        RuntimeError: Invalid radius or center.
    """
    def __init__(self,center,radius):
        self.center = np.array(center,dtype = float).reshape(-1)
        check_dim(len(self.center))
        if not radius > 0 or not np.isfinite(radius):
            raise RuntimeError('Ball radius must be positive and finite, got %r.' % (radius,))
        self.radius = float(radius)

    @property
    def dim(self):
        return len(self.center)

    @property
    def volume(self):
        return ball_volume(self.dim,self.radius)

    def dilate(self,factor):
        """Return the concentric ball factor*B with radius factor*r."""
        return Ball(self.center,factor*self.radius)

    def contains(self,points,closed = False):
        """Test which points lie in this ball.

        Args:
            points(array): Array of shape (...,n).
            closed(bool): Test against the closed ball instead.

        Returns:
            array: Boolean array with the leading shape of points.
        """
        distance = np.linalg.norm(np.asarray(points) - self.center,axis = -1)
        return distance <= self.radius if closed else distance < self.radius

    def description(self):
        return 'B((%s),%g)' % (','.join('%g' % c for c in self.center),self.radius)

    def __repr__(self):
        return 'Ball(%r,%r)' % (self.center.tolist(),self.radius)

class Annulus(object):
    """Region {x : r_in <= |x - center| < r_out} with 0 <= r_in < r_out < infinity.

    Args:
        center(array): Center point in R^n.
        r_in(float): Inner radius, possibly zero.
        r_out(float): Outer radius.

    Raises:
        RuntimeError: Invalid radii.
    """
    def __init__(self,center,r_in,r_out):
        self.center = np.array(center,dtype = float).reshape(-1)
        check_dim(len(self.center))
        if not (0 <= r_in < r_out) or not np.isfinite(r_out):
            raise RuntimeError('Invalid annulus radii (%r,%r).' % (r_in,r_out))
        self.r_in = float(r_in)
        self.r_out = float(r_out)

    @property
    def dim(self):
        return len(self.center)

    @property
    def volume(self):
        return ball_volume(self.dim,self.r_out) - ball_volume(self.dim,self.r_in)

    def description(self):
        return 'A((%s),%g,%g)' % (','.join('%g' % c for c in self.center),self.r_in,self.r_out)

def sphere_embed(angles):
    """Map angular coordinates to unit vectors.

    For n=2 the single angle is the usual polar angle. For n=3 the angles are (theta,phi) with
    theta measured from the x_1 axis, so that x_1 = cos(theta).

    Args:
        angles(array): Array of shape (...,n-1).

    Returns:
        array: Unit vectors with shape (...,n).
    """
    angles = np.asarray(angles,dtype = float)
    if angles.shape[-1] == 1:
        theta = angles[...,0]
        return np.stack((np.cos(theta),np.sin(theta)),axis = -1)
    elif angles.shape[-1] == 2:
        theta,phi = angles[...,0],angles[...,1]
        return np.stack((np.cos(theta),np.sin(theta)*np.cos(phi),np.sin(theta)*np.sin(phi)),
            axis = -1)
    raise RuntimeError('Unsupported number of sphere angles %d.' % angles.shape[-1])

class SpherePoint(object):
    """A point on S^{n-1} given by its angular coordinates.

    Args:
        angles(array): The n-1 angles in radians, see :func:`sphere_embed`.
    """
    def __init__(self,angles):
        self.angles = np.array(angles,dtype = float).reshape(-1)
        self.dim = len(self.angles) + 1
        check_dim(self.dim)

    def embed(self):
        """Return the corresponding unit vector in R^n."""
        return sphere_embed(self.angles)

class QuadConfig(object):
    """Quadrature truncation, tolerance and resolution settings.

    Args:
        rel_tol(float): Relative tolerance for refinement convergence.
        abs_tol(float): Absolute tolerance for refinement convergence.
        max_subdivisions(int): Maximum number of refinement doublings.
        t_min(float): Lower truncation of the scale variable t.
        t_max(float): Upper truncation of the scale variable t.
        y_box_radius(float): Spatial truncation radius for y.
        singular_split_radius(float): Points y closer to the support than cell_size divided by this
            value get the inner convolution from exact ray integrals about y.
        radial_order(int): Gauss-Legendre nodes per radial or scale panel.
        angular_nodes(int): Base number of angular nodes.
        cells_per_radius(int): Grid cells per radius used to sample atoms.
        partial_nodes(int): Scale nodes across a partial-coverage layer of the inner convolution.

    Raises:
        RuntimeError: Invalid parameter values.
    """
    def __init__(self,rel_tol = 1e-4,abs_tol = 1e-8,max_subdivisions = 6,t_min = 1e-6,t_max = 64.,
        y_box_radius = 64.,singular_split_radius = 0.25,radial_order = 6,angular_nodes = 64,
        cells_per_radius = 64,partial_nodes = 16):
        if not (rel_tol > 0 and abs_tol > 0):
            raise RuntimeError('Quadrature tolerances must be positive.')
        if int(max_subdivisions) < 1:
            raise RuntimeError('Need max_subdivisions >= 1, got %r.' % (max_subdivisions,))
        if not (0 < t_min < t_max):
            raise RuntimeError('Need 0 < t_min < t_max, got (%r,%r).' % (t_min,t_max))
        if not y_box_radius > 0:
            raise RuntimeError('Need y_box_radius > 0, got %r.' % (y_box_radius,))
        if not (0 < singular_split_radius < 1):
            raise RuntimeError('Need singular_split_radius in (0,1), got %r.' % (singular_split_radius,))
        if int(radial_order) < 2 or int(angular_nodes) < 8 or int(partial_nodes) < 2:
            raise RuntimeError('Quadrature orders are too small.')
        if int(cells_per_radius) < 2:
            raise RuntimeError('Need cells_per_radius >= 2, got %r.' % (cells_per_radius,))
        self.rel_tol = float(rel_tol)
        self.abs_tol = float(abs_tol)
        self.max_subdivisions = int(max_subdivisions)
        self.t_min = float(t_min)
        self.t_max = float(t_max)
        self.y_box_radius = float(y_box_radius)
        self.singular_split_radius = float(singular_split_radius)
        self.radial_order = int(radial_order)
        self.angular_nodes = int(angular_nodes)
        self.cells_per_radius = int(cells_per_radius)
        self.partial_nodes = int(partial_nodes)

    def tolerance(self,value):
        """Target error for an integral with the given value."""
        return max(self.abs_tol,self.rel_tol*abs(value))

    def as_dict(self):
        return { name:getattr(self,name) for name in QuadConfig._parameter_names }

    def replace(self,**changes):
        """Return a new configuration with some parameters changed."""
        args = self.as_dict()
        args.update(changes)
        return QuadConfig(**args)

    def description(self):
        return 'Quadrature with rel_tol=%g abs_tol=%g t in [%g,%g] |y| <= %g, %d cells/radius' % (
            self.rel_tol,self.abs_tol,self.t_min,self.t_max,self.y_box_radius,self.cells_per_radius)

    @classmethod
    def from_dict(cls,table):
        """Create a configuration from a dictionary of parameters.

        Raises:
            RuntimeError: Unknown parameter names.
        """
        unknown = set(table) - set(cls._parameter_names)
        if unknown:
            raise RuntimeError('Unknown quadrature parameter(s): %s.' % ', '.join(sorted(unknown)))
        return cls(**table)

    @staticmethod
    def add_args(parser):
        """Add command-line arguments that override quadrature settings.

        The added arguments are our constructor parameters with '_' replaced by '-' in the names.
        Defaults are None so that settings from a suite config file are only overridden when an
        option is actually given.

        Args:
            parser(argparse.ArgumentParser): Arguments will be added to this parser object using its
                add_argument method.
        """
        parser.add_argument('--rel-tol', type = float, default = None, metavar = 'TOL',
            help = 'Relative tolerance for quadrature refinement.')
        parser.add_argument('--abs-tol', type = float, default = None, metavar = 'TOL',
            help = 'Absolute tolerance for quadrature refinement.')
        parser.add_argument('--max-subdivisions', type = int, default = None, metavar = 'N',
            help = 'Maximum number of quadrature refinement doublings.')
        parser.add_argument('--cells-per-radius', type = int, default = None, metavar = 'N',
            help = 'Grid cells per radius used to sample atoms.')
        parser.add_argument('--angular-nodes', type = int, default = None, metavar = 'N',
            help = 'Base number of angular quadrature nodes.')

    @classmethod
    def from_args(cls,args,base = None):
        """Create a new :class:`QuadConfig` from a set of arguments.

        Args:
            args(object): A set of arguments accessed as a :py:class:`dict` using the
                built-in :py:func:`vars` function. Any extra arguments beyond those defined
                in :func:`add_args` will be silently ignored, as will arguments whose value is None.
            base(QuadConfig): Configuration providing values for any missing arguments.

        Returns:
            :class:`QuadConfig`: A newly constructed QuadConfig object.
        """
        pnames = inspect.getfullargspec(cls.__init__).args[1:]
        args_dict = vars(args)
        filtered_dict = { key:args_dict[key] for key in (set(pnames) & set(args_dict))
            if args_dict[key] is not None }
        if base is None:
            return cls(**filtered_dict)
        return base.replace(**filtered_dict)

    # QuadConfig constructor parameter names, in the order used by as_dict().
    _parameter_names = (
        'rel_tol','abs_tol','max_subdivisions','t_min','t_max','y_box_radius',
        'singular_split_radius','radial_order','angular_nodes','cells_per_radius','partial_nodes',
        )

class QuadResult(object):
    """Value and error estimate of a numerical integral.

    Args:
        value(float): Integral estimate.
        est_error(float): Nonnegative error estimate.
        n_evals(int): Number of integrand evaluations.
        converged(bool): Whether the requested tolerance was reached.
    """
    def __init__(self,value,est_error,n_evals,converged = True):
        self.value = float(value)
        self.est_error = float(abs(est_error))
        self.n_evals = int(n_evals)
        self.converged = bool(converged)

    def __repr__(self):
        return 'QuadResult(value=%r,est_error=%r,n_evals=%d,converged=%r)' % (
            self.value,self.est_error,self.n_evals,self.converged)

@functools.lru_cache(maxsize = None)
def gauss_legendre(order):
    """Gauss-Legendre nodes and weights on [-1,1], cached and read only."""
    nodes,weights = scipy.special.roots_legendre(order)
    nodes.setflags(write = False)
    weights.setflags(write = False)
    return nodes,weights

def panel_rule(edges,order):
    """Composite Gauss-Legendre rule over consecutive panels.

    Args:
        edges(array): Increasing panel edges.
        order(int): Nodes per panel.

    Returns:
        tuple: Arrays (nodes,weights).
    """
    edges = np.asarray(edges,dtype = float)
    xi,w = gauss_legendre(order)
    half = 0.5*np.diff(edges)
    mid = 0.5*(edges[1:] + edges[:-1])
    nodes = (mid[:,None] + half[:,None]*xi).reshape(-1)
    weights = (half[:,None]*w).reshape(-1)
    return nodes,weights

def graded_edges(lo,hi,depth = 12):
    """Panel edges on [lo,hi] that are geometrically graded toward both endpoints."""
    fractions = 0.5**np.arange(depth + 1,1,-1)
    unit = np.concatenate(([0.],fractions,[0.5],1 - fractions[::-1],[1.]))
    return lo + (hi - lo)*unit

def radial_edges(r_in,r_out,depth = 4):
    """Radial panel edges on [r_in,r_out], dyadic about the outer radius when r_in = 0."""
    if r_in == 0:
        return np.concatenate(([0.],r_out*0.5**np.arange(depth,-1,-1)))
    npanel = max(1,int(math.ceil(math.log2(r_out/r_in))))
    return np.geomspace(r_in,r_out,npanel + 1)

def dyadic_edges(lo,hi,min_fraction = 2.**-10):
    """Edges {lo,hi} plus every power of two strictly between them (at least min_fraction*hi)."""
    lower = max(lo,min_fraction*hi)
    if lower <= 0:
        return np.array([lo,hi])
    kmin = int(math.floor(math.log2(lower))) + 1
    kmax = int(math.ceil(math.log2(hi))) - 1
    inner = [2.**k for k in range(kmin,kmax + 1) if lo < 2.**k < hi]
    return np.array([lo] + inner + [hi],dtype = float)

def sphere_rule(dim,nodes,graded = False):
    """Product quadrature rule on S^{n-1}.

    For n=2 the default is the trapezoid rule on equispaced angles, a multiple of four of them so
    that the coordinate axes are nodes. It converges exponentially for smooth integrands. With
    graded set, each quadrant is instead covered by graded Gauss-Legendre panels in the angle,
    for integrands that lose smoothness on the coordinate hyperplanes like the built-in rough
    kernels. For n=3 the coordinate x_1 = cos(theta) is always integrated with graded panels on
    each hemisphere and the azimuth with the periodic trapezoid rule.

    Args:
        dim(int): Dimension n.
        nodes(int): Resolution parameter, doubled on each refinement.
        graded(bool): Use graded angle panels for n=2.

    Returns:
        tuple: Arrays (points,weights) with points of shape (N,n).
    """
    check_dim(dim)
    order = max(2,nodes//16)
    if dim == 2:
        if not graded:
            count = 4*max(2,nodes//4)
            theta = 2*math.pi*np.arange(count)/count
            return sphere_embed(theta[:,None]),np.full(count,2*math.pi/count)
        theta,w = panel_rule(np.concatenate([graded_edges(0.5*math.pi*k,0.5*math.pi*(k + 1))[:-1]
            for k in range(4)] + [[2*math.pi]]),order)
        return sphere_embed(theta[:,None]),w
    z,wz = panel_rule(np.concatenate((graded_edges(-1.,0.)[:-1],graded_edges(0.,1.))),order)
    nphi = max(8,nodes)
    phi = 2*math.pi*np.arange(nphi)/nphi
    s = np.sqrt(np.clip(1 - z*z,0.,None))
    points = np.stack(np.broadcast_arrays(z[:,None],(s[:,None]*np.cos(phi)),(s[:,None]*np.sin(phi))),
        axis = -1).reshape(-1,3)
    weights = (wz[:,None]*np.full(nphi,2*math.pi/nphi)).reshape(-1)
    return points,weights

def periodic_sphere_rule(dim,nodes):
    """Sphere rule with an embedded half-resolution rule for error estimates.

    For n=2 this is the trapezoid rule in the angle; for n=3 the azimuth uses the trapezoid rule
    and x_1 uses graded Gauss-Legendre panels. Dropping every other trapezoid node gives the
    embedded rule.

    Returns:
        tuple: Arrays (points,weights,half_weights).
    """
    check_dim(dim)
    nodes = 2*(max(8,nodes)//2)
    alternate = np.where(np.arange(nodes) % 2 == 0,2.,0.)
    if dim == 2:
        theta = 2*math.pi*(np.arange(nodes) + 0.5)/nodes
        weights = np.full(nodes,2*math.pi/nodes)
        return sphere_embed(theta[:,None]),weights,weights*alternate
    points,_ = sphere_rule(3,nodes)
    order = max(2,nodes//16)
    _,wz = panel_rule(np.concatenate((graded_edges(-1.,0.)[:-1],graded_edges(0.,1.))),order)
    weights = (wz[:,None]*np.full(nodes,2*math.pi/nodes)).reshape(-1)
    half_weights = (wz[:,None]*np.full(nodes,2*math.pi/nodes)*alternate).reshape(-1)
    return points,weights,half_weights

def _refine(estimate,cfg,what,levels = None):
    """Double the resolution of estimate(level) until successive values agree."""
    levels = cfg.max_subdivisions if levels is None else levels
    value,n_evals = estimate(0)
    total_evals = n_evals
    est_error = np.inf
    for level in range(1,levels + 1):
        new_value,n_evals = estimate(level)
        total_evals += n_evals
        est_error = abs(new_value - value)
        value = new_value
        if est_error <= cfg.tolerance(value):
            return QuadResult(value,est_error,total_evals,True)
    raise NonConvergence('%s did not converge after %d refinements (value %.6g, error %.3g).' % (
        what,levels,value,est_error))

def sphere_integral(g,dim,cfg,graded = False):
    """Integrate a function over the unit sphere S^{n-1}.

    Args:
        g(callable): Vectorized function of unit vectors with shape (N,n).
        dim(int): Dimension n, either 2 or 3.
        cfg(QuadConfig): Quadrature settings.
        graded(bool): Integrand loses smoothness on the coordinate hyperplanes, see
            :func:`sphere_rule`.

    Returns:
        QuadResult: Integral with respect to surface measure.

    Raises:
        NonConvergence: Refinements exhausted above tolerance.
    """
    check_dim(dim)
    def estimate(level):
        points,weights = sphere_rule(dim,cfg.angular_nodes*2**level,graded)
        return np.sum(weights*g(points)),len(weights)
    return _refine(estimate,cfg,'Sphere integral')

def radial_singular_integral(exponent,r_lo,r_hi,cfg = None):
    """Closed-form integral of u**exponent over [r_lo,r_hi].

    The upper limit may be infinite. Closed forms carry zero error estimate.

    Args:
        exponent(float): Power a of the integrand u**a.
        r_lo(float): Lower limit, >= 0.
        r_hi(float): Upper limit, possibly numpy.inf.
        cfg(QuadConfig): Unused, accepted for interface symmetry.

    Returns:
        QuadResult: Exact value.

    Raises:
        DivergentIntegral: The integral diverges at zero or at infinity.
    """
    if r_lo < 0 or r_hi < r_lo:
        raise RuntimeError('Invalid radial limits [%r,%r].' % (r_lo,r_hi))
    if r_lo == 0 and exponent <= -1:
        raise DivergentIntegral('Integral of u^%g diverges at u = 0.' % exponent)
    if np.isinf(r_hi):
        if exponent >= -1:
            raise DivergentIntegral('Integral of u^%g diverges at infinity.' % exponent)
        return QuadResult(-r_lo**(exponent + 1)/(exponent + 1),0.,0)
    if exponent == -1:
        return QuadResult(math.log(r_hi/r_lo),0.,0)
    return QuadResult((r_hi**(exponent + 1) - r_lo**(exponent + 1))/(exponent + 1),0.,0)

def _polar_sum(g,center,r_in,r_out,order,nodes):
    dim = len(center)
    u,wu = panel_rule(radial_edges(r_in,r_out),order)
    dirs,wd = sphere_rule(dim,nodes,graded = True)
    points = center + u[:,None,None]*dirs[None,:,:]
    values = np.asarray(g(points.reshape(-1,dim)),dtype = float).reshape(len(u),len(wd))
    return np.sum((wu*u**(dim - 1))[:,None]*wd[None,:]*values),values.size

def annulus_integral(g,region,cfg):
    """Integrate over a ball or annulus using polar coordinates about its center.

    Args:
        g(callable): Vectorized function of points with shape (N,n).
        region(Ball or Annulus): Integration region.
        cfg(QuadConfig): Quadrature settings.

    Returns:
        QuadResult: The integral.

    Raises:
        NonConvergence: Refinements exhausted above tolerance.
    """
    if isinstance(region,Ball):
        r_in,r_out = 0.,region.radius
    else:
        r_in,r_out = region.r_in,region.r_out
    def estimate(level):
        return _polar_sum(g,region.center,r_in,r_out,cfg.radial_order*2**level,
            cfg.angular_nodes*2**level)
    return _refine(estimate,cfg,'Integral over %s' % region.description(),
        levels = min(cfg.max_subdivisions,4))

def ball_integral(g,ball,cfg):
    """Integrate a function over a ball, see :func:`annulus_integral`."""
    return annulus_integral(g,ball,cfg)

def dyadic_tail_integral(g,center,r0,cfg,n_shells = 10,max_remainder = 0.1):
    """Integrate over the complement of B(center,r0) using dyadic shells.

    Shells [2^k r0, 2^(k+1) r0) are integrated for k < n_shells. The remainder beyond the last
    shell is estimated by continuing the ratio of the last two shell integrals geometrically.

    Args:
        g(callable): Vectorized integrand of points with shape (N,n).
        center(array): Center of the excluded ball.
        r0(float): Radius of the excluded ball.
        cfg(QuadConfig): Quadrature settings.
        n_shells(int): Number of shells integrated numerically.
        max_remainder(float): Largest allowed remainder as a fraction of the total.

    Returns:
        QuadResult: Integral including the remainder estimate.

    Raises:
        DivergentIntegral: The shell integrals do not decay.
        TruncationDominates: The remainder exceeds max_remainder of the total.
    """
    shells = [annulus_integral(g,Annulus(center,r0*2**k,r0*2**(k + 1)),cfg) for k in range(n_shells)]
    values = np.array([s.value for s in shells])
    total = np.sum(values)
    est_error = np.sum([s.est_error for s in shells])
    remainder = 0.
    if values[-1] != 0:
        ratio = abs(values[-1])/abs(values[-2]) if values[-2] != 0 else np.inf
        if ratio >= 1 - 1e-9:
            raise DivergentIntegral('Dyadic shell integrals do not decay (ratio %.3g).' % ratio)
        remainder = values[-1]*ratio/(1 - ratio)
    total += remainder
    if abs(remainder) > max_remainder*abs(total):
        raise TruncationDominates('Tail remainder %.3g exceeds %g of total %.3g.' % (
            remainder,max_remainder,total))
    return QuadResult(total,est_error + abs(remainder),sum(s.n_evals for s in shells))

# Refinement levels of the (n+1)-dimensional cone integral are capped here since each level
# multiplies the cost by 2^(n+1).
_cone_max_levels = 3

def _cone_sum(h,apex,region,order,nodes,t_min,t_max,y_box):
    dim = len(apex)
    t_nodes,t_weights = panel_rule(dyadic_edges(t_min,t_max,min_fraction = 0.),order)
    dirs,wd = sphere_rule(dim,nodes,graded = True)
    total,n_evals = 0.,0
    for t,wt in zip(t_nodes,t_weights):
        if region == 'inside_cone':
            lo,hi = 0.,min(t,y_box)
        elif region == 'outside_cone':
            lo,hi = min(t,y_box),y_box
        else:
            lo,hi = 0.,y_box
        if hi <= lo:
            continue
        u,wu = panel_rule(dyadic_edges(lo,hi),order)
        points = (apex + u[:,None,None]*dirs[None,:,:]).reshape(-1,dim)
        values = np.asarray(h(points,np.full(len(points),t)),dtype = float).reshape(len(u),len(wd))
        total += wt*np.sum((wu*u**(dim - 1))[:,None]*wd[None,:]*values)
        n_evals += values.size
    return total,n_evals

def cone_region_integral(h,apex,region,cfg):
    """Integrate h(y,t) over a region of the upper half-space R^{n+1}_+.

    The domain is truncated to t in [t_min,t_max] and |y - apex| <= y_box_radius. The reported
    error includes a truncation term, obtained by doubling t_max and y_box_radius once and
    differencing.

    Args:
        h(callable): Vectorized function h(y,t) of points y with shape (N,n) and scales t with
            shape (N,).
        apex(array): The point x defining the cone {|y - x| < t}.
        region(str): One of 'inside_cone', 'outside_cone' or 'full'.
        cfg(QuadConfig): Quadrature settings.

    Returns:
        QuadResult: The truncated integral.

    Raises:
        NonConvergence: Refinements exhausted above tolerance.
        TruncationDominates: The doubling difference exceeds ten times the larger of the quadrature
            error and the tolerance.
    """
    if region not in ('inside_cone','outside_cone','full'):
        raise RuntimeError('Unknown cone region "%s".' % region)
    apex = np.array(apex,dtype = float).reshape(-1)
    check_dim(len(apex))
    state = { }
    def estimate(level):
        state['level'] = level
        return _cone_sum(h,apex,region,cfg.radial_order*2**level,cfg.angular_nodes*2**level,
            cfg.t_min,cfg.t_max,cfg.y_box_radius)
    result = _refine(estimate,cfg,'Cone region integral',
        levels = min(cfg.max_subdivisions,_cone_max_levels))
    level = state['level']
    doubled,n_evals = _cone_sum(h,apex,region,cfg.radial_order*2**level,cfg.angular_nodes*2**level,
        cfg.t_min,2*cfg.t_max,2*cfg.y_box_radius)
    truncation_error = abs(doubled - result.value)
    if truncation_error > 10*max(result.est_error,cfg.tolerance(result.value)):
        raise TruncationDominates('Cone integral truncation error %.3g dominates (value %.6g).' % (
            truncation_error,result.value))
    est_error = result.est_error + truncation_error
    log.debug('cone integral %.8g +/- %.2g (truncation %.2g)',result.value,est_error,truncation_error)
    return QuadResult(result.value,est_error,result.n_evals + n_evals,
        est_error <= cfg.tolerance(result.value))
