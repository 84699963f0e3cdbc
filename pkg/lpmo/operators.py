"""Inner convolution and the parametric square functions of a sampled field.

For a field f supported in a ball B(x0,r) the inner convolution

    F(y,t) = integral over |y - z| < t of Omega(y - z) |y - z|^(rho - n) f(z) dz

is tabulated once per field on a polar grid of points y about x0. For each y it is constant,
equal to G(y), once t exceeds |y - x0| + R (R the radius containing every nonzero cell), and it is
sampled on Gauss-Legendre panels across the partial-coverage layer below that. The area integral
and the g*_lambda function at any x then reduce to sums over the table: the full-coverage part of
the t integral is closed form, and the layer part is a panel sum that is re-interpolated where the
cone |y - x| < t cuts a panel.

Two models are used for F. Points y within a few cells of the support use exact integrals along
rays from y (f is piecewise constant along each ray and the radial factor u^(rho - 1) integrates
in closed form), with the kernel's discrete mean removed so that F(y,t) vanishes identically for t
below the distance from y to the nearest cell boundary. Points further away use cell sums with a
linear coverage ramp across each cell.

Tables are built at two resolution levels. The second splits every radial panel in two, doubles
the scale panels and the rays, and replaces the linear ramp by the exact coverage of each cell by
the tangent plane to the sphere. Values come from the finer level and their error estimates
include the change between levels. Single evaluations of F always use the exact coverage.
"""
from __future__ import print_function, division

import math
import logging
import functools
import itertools

import numpy as np
import scipy.interpolate
import scipy.special

from . import quadrature
from .quadrature import Ball, TruncationDominates, gauss_legendre
from .field import SampledField, PowerTail
from .kernels import HypothesisViolation

log = logging.getLogger(__name__)

# Largest number of float elements in one chunk of the cell-sum arrays.
_chunk_elements = 2**22

# Resolution levels of a square function table beyond the first.
_table_max_levels = 1

class SquareFunctionResult(object):
    """Value of a square function at one point.

    Args:
        x(array): The target point.
        value(float): Nonnegative value.
        est_error(float): Error estimate for value.
        t_min(float): Lower scale cutoff used for the inner convolution.
        t_max(float): Scale that sets the spatial extent of the table.
        truncation_error(float): Part of est_error from the spatial truncation.
        cone_part(float): For g*_lambda, the contribution of the cone |y - x| < t.
        off_cone_part(float): For g*_lambda, the contribution of the rest of the half-space.
        region_breakdown(dict): Optional contributions of a partition of the half-space, keyed by
            region name. Squares of the entries add up to value^2.
    """
    def __init__(self,x,value,est_error,t_min,t_max,truncation_error = 0.,cone_part = None,
        off_cone_part = None,region_breakdown = None,converged = True):
        self.x = np.asarray(x,dtype = float)
        self.value = float(value)
        self.est_error = float(est_error)
        self.t_min = t_min
        self.t_max = t_max
        self.truncation_error = float(truncation_error)
        self.cone_part = cone_part
        self.off_cone_part = off_cone_part
        self.region_breakdown = region_breakdown
        self.converged = converged

    def __repr__(self):
        return 'SquareFunctionResult(x=%r,value=%.6g,est_error=%.2g)' % (
            self.x.tolist(),self.value,self.est_error)

def certified_t_min(f,k,rho,cfg):
    """Lower scale cutoff for the inner convolution.

    For |f| <= M supported in a ball of volume V, |F(y,t)| <= |S|*sup|Omega|*M*t^rho/rho and the
    part of the squared integral below tau is at most K*tau^(2*rho - n)/(2*rho - n) with
    K = (|S|*sup|Omega|*M/rho)^2*V. The cutoff keeps this below abs_tol^2 and is at least t_min.
    """
    n = f.dim
    sup_omega = k.sup_norm if k.sup_norm is not None else 1.
    volume = quadrature.ball_volume(n,f.support_radius())
    scale = (quadrature.sphere_area(n)*sup_omega*f.sup_norm()/rho)**2*volume
    if scale <= 0:
        return cfg.t_min
    certified = (cfg.abs_tol**2*(2*rho - n)/scale)**(1/(2*rho - n))
    return max(cfg.t_min,certified)

def _ray_rule(dim,nodes):
    if dim == 2:
        theta = 2*math.pi*(np.arange(nodes) + 0.5)/nodes
        return quadrature.sphere_embed(theta[:,None]),np.full(nodes,2*math.pi/nodes)
    return quadrature.sphere_rule(3,nodes)

def _ray_sums(f,k,rho,y,t_nodes,n_rays):
    """Inner convolution by exact integration along rays from each y.

    Args:
        y(numpy.ndarray): Points with shape (m,n).
        t_nodes(numpy.ndarray): Scales with shape (m,T).

    Returns:
        tuple: Arrays (G,F) with shapes (m,) and (m,T).
    """
    dim = f.dim
    dirs,dw = _ray_rule(dim,n_rays)
    omega = k.evaluate(-dirs)
    omega = omega - np.sum(dw*omega)/np.sum(dw)
    cw = dw*omega
    lines = [f.origin[i] + f.cell_size*np.arange(f.shape[i] + 1) for i in range(dim)]
    corners = np.array([f.origin,f.origin + f.cell_size*np.array(f.shape)])
    G = np.empty(len(y))
    F = np.empty(t_nodes.shape)
    for row,(point,t) in enumerate(zip(y,t_nodes)):
        cap = np.max(np.linalg.norm(corners - point,axis = -1))*np.sqrt(dim) + 1.
        crossings = [np.zeros((len(dirs),1))]
        with np.errstate(divide = 'ignore',invalid = 'ignore'):
            for i in range(dim):
                s = (lines[i][None,:] - point[i])/dirs[:,i][:,None]
                crossings.append(np.where(s > 0,np.minimum(s,cap),cap))
        s = np.sort(np.concatenate(crossings,axis = 1),axis = 1)
        mids = 0.5*(s[:,1:] + s[:,:-1])
        values = f.evaluate(point + mids[...,None]*dirs[:,None,:])
        powers = s**rho/rho
        cumulative = np.concatenate((np.zeros((len(dirs),1)),
            np.cumsum(values*np.diff(powers,axis = 1),axis = 1)),axis = 1)
        G[row] = np.sum(cw*cumulative[:,-1])
        t = np.minimum(t,cap)
        # Segment index of each scale on each ray, found in one sorted search by offsetting rows.
        nseg = s.shape[1] - 1
        offset = 2*cap*np.arange(len(dirs))[:,None]
        index = np.searchsorted((s + offset).ravel(),(t[None,:] + offset).ravel(),side = 'right')
        index = index.reshape(len(dirs),len(t)) - 1 - (nseg + 1)*np.arange(len(dirs))[:,None]
        index = np.clip(index,0,nseg - 1)
        ray = np.arange(len(dirs))[:,None]
        start = s[ray,index]
        stop = np.minimum(t[None,:],s[ray,index + 1])
        psi = cumulative[ray,index] + values[ray,index]*(np.maximum(stop,start)**rho - start**rho)/rho
        F[row] = np.sum(cw[:,None]*psi,axis = 0)
    return G,F

def _plane_coverage(s,widths):
    """Fraction of a box on the near side of a plane at signed offset s from its center.

    The offset of a uniform point of the box along the plane normal is a sum of independent
    uniform variables with the projected edge lengths as widths, so the fraction is their
    distribution function, a piecewise polynomial of degree n.

    Args:
        s(numpy.ndarray): Signed offsets.
        widths(numpy.ndarray): Projected edge lengths, broadcastable to s.shape + (n,).
    """
    dim = widths.shape[-1]
    widths = np.maximum(widths,1e-3*np.max(widths,axis = -1,keepdims = True))
    total_width = np.sum(widths,axis = -1)
    u = np.clip(s + 0.5*total_width,0.,total_width)
    total = np.zeros(np.broadcast(u,total_width).shape)
    for subset in itertools.product((0.,1.),repeat = dim):
        total += (-1)**int(sum(subset))*np.maximum(u - np.dot(widths,subset),0.)**dim
    return np.clip(total/(math.factorial(dim)*np.prod(widths,axis = -1)),0.,1.)

def _ramp_sums(f,k,rho,y,t_nodes,exact_coverage = False):
    """Inner convolution by cell sums with a coverage ramp across each cell.

    The ramp is linear across the projected cell width, or with exact_coverage the fraction of
    the cell inside the tangent plane to the sphere |y - z| = t.
    """
    centers,values = f.nonzero_cells()
    weights_base = values*f.cell_volume
    ncells,ntimes = len(centers),t_nodes.shape[1]
    G = np.zeros(len(y))
    F = np.zeros(t_nodes.shape)
    chunk = max(1,_chunk_elements//max(1,ncells*(ntimes + 1)))
    for lo in range(0,len(y),chunk):
        hi = min(lo + chunk,len(y))
        diff = y[lo:hi,None,:] - centers[None,:,:]
        dist = np.linalg.norm(diff,axis = -1)
        weights = k.evaluate(diff)*dist**(rho - f.dim)*weights_base
        G[lo:hi] = np.sum(weights,axis = 1)
        offset = t_nodes[lo:hi,:,None] - dist[:,None,:]
        if exact_coverage:
            widths = f.cell_size*np.abs(diff)/dist[...,None]
            frac = _plane_coverage(offset,widths[:,None,:,:])
        else:
            width = f.cell_size*np.sum(np.abs(diff),axis = -1)/dist
            frac = np.clip(0.5 + offset/width[:,None,:],0.,1.)
        F[lo:hi] = np.einsum('mtc,mc->mt',frac,weights)
    return G,F

def _subcell_sums(f,k,rho,y,t_nodes,refine):
    """Inner convolution by subcell midpoint sums with a hard disk indicator."""
    centers,values = f.nonzero_cells()
    h = f.cell_size
    offsets = (np.stack(np.meshgrid(*[np.arange(refine)]*f.dim,indexing = 'ij'),axis = -1).reshape(-1,f.dim)
        + 0.5)*h/refine - 0.5*h
    points = (centers[:,None,:] + offsets[None,:,:]).reshape(-1,f.dim)
    weights_base = np.repeat(values,len(offsets))*f.cell_volume/len(offsets)
    G = np.empty(len(y))
    F = np.empty(t_nodes.shape)
    for row,(point,t) in enumerate(zip(y,t_nodes)):
        diff = point - points
        dist = np.linalg.norm(diff,axis = -1)
        weights = k.evaluate(diff)*dist**(rho - f.dim)*weights_base
        order = np.argsort(dist,kind = 'stable')
        cumulative = np.concatenate(([0.],np.cumsum(weights[order])))
        G[row] = cumulative[-1]
        F[row] = cumulative[np.searchsorted(dist[order],t,side = 'left')]
    return G,F

def inner_F(f,k,rho,y,t,cfg = None):
    """The truncated singular convolution F(y,t).

    Args:
        f(SampledField): Field with compact support.
        k(Kernel): The kernel Omega.
        rho(float): Order rho of the radial factor |y - z|^(rho - n).
        y(array): Point with shape (n,) or points with shape (N,n).
        t(float or array): Scale, or scales with shape (N,).
        cfg(QuadConfig): Settings.

    Returns:
        float or numpy.ndarray: F at each (y,t).
    """
    cfg = quadrature.QuadConfig() if cfg is None else cfg
    y = np.asarray(y,dtype = float)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    t = np.broadcast_to(np.asarray(t,dtype = float),(len(y),)).reshape(-1,1)
    result = np.zeros(len(y))
    if not f.is_zero():
        near = _near_mask(f,y,cfg)
        if np.any(near):
            result[near] = _ray_sums(f,k,rho,y[near],t[near],4*cfg.angular_nodes)[1][:,0]
        if np.any(~near):
            result[~near] = _ramp_sums(f,k,rho,y[~near],t[~near],exact_coverage = True)[1][:,0]
    return result[0] if single else result

def brute_force_inner_F(f,k,rho,y,t,cfg = None,refine = 4):
    """Reference value of F(y,t) at refine times the resolution of :func:`inner_F`.

    Far points use subcell midpoint sums with refine^n subcells per cell and an exact disk
    indicator. Near points use refine times as many rays.
    """
    cfg = quadrature.QuadConfig() if cfg is None else cfg
    y = np.asarray(y,dtype = float)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    t = np.broadcast_to(np.asarray(t,dtype = float),(len(y),)).reshape(-1,1)
    result = np.zeros(len(y))
    if not f.is_zero():
        near = _near_mask(f,y,cfg)
        if np.any(near):
            result[near] = _ray_sums(f,k,rho,y[near],t[near],4*refine*cfg.angular_nodes)[1][:,0]
        if np.any(~near):
            result[~near] = _subcell_sums(f,k,rho,y[~near],t[~near],refine)[1][:,0]
    return result[0] if single else result

def _near_mask(f,y,cfg):
    """Points whose distance to the support is below cell_size/singular_split_radius."""
    distance = np.linalg.norm(y - f.support_center(),axis = -1)
    return distance < f.support_radius() + f.cell_size/cfg.singular_split_radius

@functools.lru_cache(maxsize = None)
def _weighted_tail_spline(weight_exponent,scale_exponent):
    """Spline of log(h(x)) against log(x) for the g*_lambda full-coverage tail.

    With a = lambda*n and N the scale exponent, the tail integral from T to infinity of
    (t/(t + D))^a t^-N dt equals T^(1 - N)/(N - 1)*h(T/D), where h increases from 0 to 1.
    """
    a,N = weight_exponent,scale_exponent
    logx = np.arange(-20.,20.0001,0.05)
    xi,w = gauss_legendre(8)
    half = 0.5*np.diff(logx)
    s = 0.5*(logx[1:] + logx[:-1])[:,None] + half[:,None]*xi
    integrand = np.exp((a - N + 1)*s)*(1 + np.exp(s))**(-a)
    pieces = np.sum(half[:,None]*w*integrand,axis = 1)
    top = math.exp(logx[-1])
    tail_top = top**(1 - N)/(N - 1) - a*top**(-N)/N
    tail = tail_top + np.concatenate((np.cumsum(pieces[::-1])[::-1],[0.]))
    ratio = (N - 1)*np.exp((N - 1)*logx)*tail
    return scipy.interpolate.CubicSpline(logx,np.log(ratio)),logx[0],logx[-1]

class _Layer(object):
    """Samples of F(y,t) across the partial-coverage layer for a set of points y."""
    def __init__(self,y,weights,half_weights,distance,G,edges,order,F_function):
        self.y = y
        self.weights = weights
        self.half_weights = half_weights
        self.distance = distance
        self.G = G
        self.edges = edges
        self.order = order
        xi,gw = gauss_legendre(order)
        half = 0.5*np.diff(edges,axis = 1)
        mid = 0.5*(edges[:,1:] + edges[:,:-1])
        self.t_nodes = mid[...,None] + half[...,None]*xi
        self.t_weights = half[...,None]*gw
        shape = self.t_nodes.shape
        G_values,F = F_function(y,self.t_nodes.reshape(len(y),-1))
        if self.G is None:
            self.G = G_values
        self.F = F.reshape(shape)
        xi = np.asarray(xi)
        self._xi = xi
        self._gw = np.asarray(gw)
        diffs = xi[:,None] - xi[None,:]
        np.fill_diagonal(diffs,1.)
        self._bary = 1/np.prod(diffs,axis = 1)

    @property
    def hi(self):
        return self.edges[:,-1]

    def _interpolate(self,values,points):
        """Lagrange interpolation from the panel nodes to reference points with shape (Q,P)."""
        diff = points[...,None] - self._xi
        diff = np.where(np.abs(diff) < 1e-14,1e-14,diff)
        basis = self._bary/diff
        basis /= np.sum(basis,axis = -1,keepdims = True)
        return np.einsum('qpj,qj->qp',basis,values)

    def integrate(self,lower,upper,weight):
        """Integral of F(y,t)^2*weight(t,rows) over t in [lower,upper] for every y.

        Args:
            lower(numpy.ndarray): Lower limits with shape (m,).
            upper(numpy.ndarray): Upper limits with shape (m,).
            weight(callable): Function of scales and the matching row indices.

        Returns:
            numpy.ndarray: Integrals with shape (m,).
        """
        start,stop = self.edges[:,:-1],self.edges[:,1:]
        a = np.maximum(start,lower[:,None])
        b = np.minimum(stop,upper[:,None])
        active = b > a
        whole = active & (a <= start) & (b >= stop)
        cut = active & ~whole
        rows = np.broadcast_to(np.arange(len(self.y))[:,None,None],self.t_nodes.shape)
        values = self.t_weights*self.F**2*weight(self.t_nodes,rows)
        total = np.sum(np.where(whole[...,None],values,0.),axis = (1,2))
        ci,ck = np.nonzero(cut)
        if len(ci):
            e0,e1 = start[ci,ck],stop[ci,ck]
            sa = 2*(a[ci,ck] - e0)/(e1 - e0) - 1
            sb = 2*(b[ci,ck] - e0)/(e1 - e0) - 1
            points = sa[:,None] + (sb - sa)[:,None]*(self._xi + 1)/2
            F_new = self._interpolate(self.F[ci,ck],points)
            t_new = e0[:,None] + (e1 - e0)[:,None]*(points + 1)/2
            w_new = 0.5*(b[ci,ck] - a[ci,ck])[:,None]*self._gw
            contribution = np.sum(w_new*F_new**2*weight(t_new,np.broadcast_to(ci[:,None],t_new.shape)),axis = 1)
            np.add.at(total,ci,contribution)
        return total

class SquareFunction(object):
    """Area integral and g*_lambda function of one sampled field at many points.

    Error estimates add the angular half-rule difference, the outer shell contribution and the
    change of the squared value between the two finest table levels used. A result only reports
    convergence when their total is within tolerance.

    Args:
        f(SampledField): Field with compact support.
        k(Kernel): The kernel Omega.
        params(OperatorParams): rho and, for g*_lambda, lambda.
        cfg(QuadConfig): Settings.
        points(array): Target points the table must serve, shape (N,n).
        oracle(bool): Build the reference table at four times the resolution, with midpoint
            rules in y and t and subcell sums for F.

    Raises:
        RuntimeError: Field has no certified support.
    """
    def __init__(self,f,k,params,cfg = None,points = None,oracle = False):
        self.f = f
        self.kernel = k
        self.params = params
        self.cfg = quadrature.QuadConfig() if cfg is None else cfg
        self.oracle = oracle
        self.dim = f.dim
        self.zero = f.is_zero()
        self.center = f.support_center()
        self.radius = f.support_ball.radius if f.support_ball is not None else f.support_radius()
        self.t_min = certified_t_min(f,k,params.rho,self.cfg) if not self.zero else self.cfg.t_min
        points = np.zeros((1,self.dim)) + self.center if points is None else np.atleast_2d(points)
        reach = np.max(np.linalg.norm(points - self.center,axis = -1))
        self.t_max = max(4*reach,64*self.radius)
        self.extent = reach + self.t_max + 64*self.radius
        if not self.zero:
            self._build()

    def _build(self):
        cfg = self.cfg
        r = self.radius
        R = self.f.support_radius()
        top = int(math.ceil(math.log2(self.extent/r)))
        self.inner_limit = r*2.**top
        # Points below split_distance get ray sums, so it is a radial panel edge.
        self.split_distance = R + self.f.cell_size/cfg.singular_split_radius
        edges = np.concatenate(([0.],r*2.**np.arange(-4,top + 2)))
        self.edges = np.unique(np.concatenate((edges,[R,self.split_distance])))
        self.levels = [self._build_level(0)]

    def _build_level(self,level):
        """Layers of the table with radial panels split 2^level ways and 2^level times the scale
        panels and rays.
        """
        cfg = self.cfg
        dim = self.dim
        R = self.f.support_radius()
        refine = 4 if self.oracle else 1
        split = 4*cfg.radial_order if self.oracle else 2**level
        fine = np.concatenate([np.linspace(lo,hi,split + 1)[:-1]
            for lo,hi in zip(self.edges[:-1],self.edges[1:])] + [self.edges[-1:]])
        u,wu = quadrature.panel_rule(fine,1 if self.oracle else cfg.radial_order)
        dirs,wd,wd_half = quadrature.periodic_sphere_rule(dim,refine*cfg.angular_nodes)
        y = (self.center + u[:,None,None]*dirs[None,:,:]).reshape(-1,dim)
        radial = (wu*u**(dim - 1))[:,None]
        weights = (radial*wd[None,:]).reshape(-1)
        half_weights = (radial*wd_half[None,:]).reshape(-1)
        distance = np.repeat(u,len(wd))
        near = distance < self.split_distance
        rho = self.params.rho
        layers = [ ]
        # Near points: geometric panels from t_min to the far edge of the support.
        if np.any(near):
            lo = np.full(np.count_nonzero(near),self.t_min)
            hi = distance[near] + R
            if self.oracle:
                npanel,order = 10*cfg.partial_nodes//2,1
            else:
                npanel,order = 10*2**level,cfg.partial_nodes//2
            edges_t = np.exp(np.log(lo)[:,None] + np.log(hi/lo)[:,None]*np.linspace(0,1,npanel + 1))
            rays = 4*refine*2**level*cfg.angular_nodes
            F_function = lambda yy,tt: _ray_sums(self.f,self.kernel,rho,yy,tt,rays)
            layers.append(_Layer(y[near],weights[near],half_weights[near],distance[near],None,
                edges_t,order,F_function))
        far = ~near
        if np.any(far):
            lo = np.maximum(distance[far] - R,self.t_min)
            hi = distance[far] + R
            if self.oracle:
                npanel,order = 4*cfg.partial_nodes,1
                F_function = lambda yy,tt: _subcell_sums(self.f,self.kernel,rho,yy,tt,refine)
            else:
                npanel,order = 2*2**level,max(2,cfg.partial_nodes//2)
                F_function = lambda yy,tt: _ramp_sums(self.f,self.kernel,rho,yy,tt,
                    exact_coverage = level > 0)
            edges_t = lo[:,None] + (hi - lo)[:,None]*np.linspace(0,1,npanel + 1)
            layers.append(_Layer(y[far],weights[far],half_weights[far],distance[far],None,
                edges_t,order,F_function))
        log.debug('square function table level %d with %d points y, extent %.3g, t_min %.3g',level,
            len(y),self.extent,self.t_min)
        return layers

    def _refined(self,sums_of):
        """Sums from the finest table level needed, and their change from the previous level.

        Args:
            sums_of(callable): Function of a list of layers returning a tuple whose first entry is
                the array of weighted sums (all, half-rule, inner shells).

        Returns:
            tuple: The sums tuple of the last level used and the change in the squared value.
        """
        limit = 0 if self.oracle else min(self.cfg.max_subdivisions,_table_max_levels)
        results = [sums_of(self.levels[0])]
        change = 0.
        for level in range(1,limit + 1):
            if level == len(self.levels):
                self.levels.append(self._build_level(level))
            results.append(sums_of(self.levels[level]))
            change = abs(results[-1][0][0] - results[-2][0][0])
            value = math.sqrt(max(results[-1][0][0],0.))
            if change <= 2*value*self.cfg.tolerance(value):
                break
        return results[-1],change

    def _scale_tail(self,T):
        """Integral of t^-N from T to infinity."""
        N = self.params.scale_exponent
        return T**(1 - N)/(N - 1)

    def _weighted_scale_tail(self,T,D):
        """Integral of (t/(t + D))^(lambda*n)*t^-N from T to infinity."""
        N = self.params.scale_exponent
        spline,lo,hi = _weighted_tail_spline(self.params.lam*self.dim,N)
        with np.errstate(divide = 'ignore'):
            logx = np.log(T) - np.log(D)
        factor = np.where(logx >= hi,1.,np.exp(spline(np.clip(logx,lo,hi))))
        return T**(1 - N)/(N - 1)*factor

    def _finish(self,x,sums,resolution = 0.,regions = None,cone = None):
        """Turn weighted sums (all, half-rule, inner shells) and the change of the squared value
        between table levels into a result.
        """
        total,half,inner = sums
        quad_error = abs(total - half) + resolution
        truncation = abs(total - inner)
        if truncation > 10*max(quad_error,self.cfg.tolerance(total)):
            raise TruncationDominates('Square function truncation error %.3g dominates (value^2 %.6g).' % (
                truncation,total))
        value = math.sqrt(max(total,0.))
        error_sq = quad_error + truncation
        est_error = error_sq/(2*value) if value > 0 else math.sqrt(error_sq)
        breakdown = None
        if regions is not None:
            breakdown = { name:math.sqrt(max(part,0.)) for name,part in regions.items() }
        cone_part = off_cone_part = None
        if cone is not None:
            cone_part,off_cone_part = (math.sqrt(max(part,0.)) for part in cone)
        return SquareFunctionResult(x,value,est_error,self.t_min,self.t_max,truncation,cone_part,
            off_cone_part,breakdown,est_error <= self.cfg.tolerance(value))

    def _zero_result(self,x,regions = None):
        breakdown = { name:0. for name in regions } if regions is not None else None
        cone = 0. if self.params.lam is not None else None
        return SquareFunctionResult(x,0.,0.,self.t_min,self.t_max,0.,cone,cone,breakdown)

    def _weighted_sums(self,layer,integrand):
        inner = layer.distance < self.inner_limit
        return np.array([np.sum(layer.weights*integrand),np.sum(layer.half_weights*integrand),
            np.sum(np.where(inner,layer.weights*integrand,0.))])

    def area(self,x,regions = False,t_cap = np.inf):
        """The area integral mu_S(f)(x).

        Args:
            x(array): Target point.
            regions(bool): Also report the partition into 'I1' (y within 16 radii of the support
                center), 'I2' (outside, t <= |y - x0| + 8r) and 'I3' (outside, larger t).
            t_cap(float): Restrict the scale integral to t <= t_cap.

        Returns:
            SquareFunctionResult: The value with error estimates.
        """
        x = np.asarray(x,dtype = float)
        names = ('I1','I2','I3')
        if self.zero:
            return self._zero_result(x,names if regions else None)
        N = self.params.scale_exponent
        tail = lambda T: self._scale_tail(T) - self._scale_tail(np.maximum(T,t_cap))
        weight = lambda t,rows: np.where(t <= t_cap,t**(-N),0.)

        def sums_of(layers):
            sums = np.zeros(3)
            parts = dict.fromkeys(names,0.)
            for layer in layers:
                D = np.linalg.norm(layer.y - x,axis = -1)
                hi = layer.hi
                start = np.maximum(D,hi)
                partial = layer.integrate(D,np.minimum(hi,t_cap),weight)
                integrand = layer.G**2*tail(start) + partial
                sums += self._weighted_sums(layer,integrand)
                if regions:
                    inside = layer.distance < 16*self.radius
                    split = np.maximum(start,layer.distance + 8*self.radius)
                    I2 = partial + layer.G**2*(tail(start) - tail(split))
                    I3 = layer.G**2*tail(split)
                    parts['I1'] += np.sum(np.where(inside,layer.weights*integrand,0.))
                    parts['I2'] += np.sum(np.where(inside,0.,layer.weights*I2))
                    parts['I3'] += np.sum(np.where(inside,0.,layer.weights*I3))
            return sums,parts

        (sums,parts),change = self._refined(sums_of)
        return self._finish(x,sums,change,parts if regions else None)

    def gstar(self,x,regions = False):
        """The g*_lambda function, reported with its cone and off-cone parts.

        With regions set, the off-cone part is further split into 'J1' (y within 16 radii of the
        support center), 'J2' (outside, t <= |y - x0| + 8r) and 'J3' (outside, larger t), and the
        cone part is reported as 'cone'.

        Raises:
            HypothesisViolation: The operator parameters have no lambda.
        """
        if self.params.lam is None:
            raise HypothesisViolation('The g*_lambda function needs lambda.')
        x = np.asarray(x,dtype = float)
        names = ('cone','J1','J2','J3')
        if self.zero:
            return self._zero_result(x,names if regions else None)
        N = self.params.scale_exponent
        exponent = self.params.lam*self.dim

        def sums_of(layers):
            sums = np.zeros(3)
            cone_sums = np.zeros(2)
            parts = dict.fromkeys(names,0.)
            for layer in layers:
                D = np.linalg.norm(layer.y - x,axis = -1)
                weight = lambda t,rows: (t/(t + D[rows]))**exponent*t**(-N)
                hi = layer.hi
                start = np.maximum(D,hi)
                tail_all = self._weighted_scale_tail(hi,D)
                tail_cone = self._weighted_scale_tail(start,D)
                lo = layer.edges[:,0]
                partial_all = layer.integrate(lo,hi,weight)
                partial_cone = layer.integrate(D,hi,weight)
                cone = layer.G**2*tail_cone + partial_cone
                off = layer.G**2*(tail_all - tail_cone) + (partial_all - partial_cone)
                sums += self._weighted_sums(layer,cone + off)
                cone_sums += [np.sum(layer.weights*cone),np.sum(layer.weights*off)]
                if regions:
                    inside = layer.distance < 16*self.radius
                    split = np.minimum(np.maximum(layer.distance + 8*self.radius,hi),start)
                    tail_split = self._weighted_scale_tail(split,D)
                    J2 = (partial_all - partial_cone) + layer.G**2*(tail_all - tail_split)
                    J3 = layer.G**2*(tail_split - tail_cone)
                    parts['cone'] += np.sum(layer.weights*cone)
                    parts['J1'] += np.sum(np.where(inside,layer.weights*off,0.))
                    parts['J2'] += np.sum(np.where(inside,0.,layer.weights*J2))
                    parts['J3'] += np.sum(np.where(inside,0.,layer.weights*J3))
            return sums,parts,cone_sums

        (sums,parts,cone_sums),change = self._refined(sums_of)
        return self._finish(x,sums,change,parts if regions else None,cone_sums)

def mu_S(f,k,params,x,cfg = None):
    """Area integral of f at x, see :meth:`SquareFunction.area`."""
    return SquareFunction(f,k,params,cfg,points = [x]).area(x)

def mu_star(f,k,params,x,cfg = None):
    """The g*_lambda function of f at x, see :meth:`SquareFunction.gstar`."""
    return SquareFunction(f,k,params,cfg,points = [x]).gstar(x)

def _check_far(f,x):
    ball = f.support_ball
    if ball is None:
        raise RuntimeError('Region decompositions need a field with a support ball.')
    if np.linalg.norm(np.asarray(x) - ball.center) < 64*ball.radius:
        raise RuntimeError('Region decompositions need x outside 64B.')

def region_decomposed_mu_S(b,k,params,x,cfg = None,t_cap = np.inf):
    """Area integral at x outside 64B split into the regions I1, I2 and I3."""
    _check_far(b,x)
    return SquareFunction(b,k,params,cfg,points = [x]).area(x,regions = True,t_cap = t_cap)

def region_decomposed_mu_star(b,k,params,x,cfg = None):
    """The g*_lambda function at x outside 64B split into the cone part and J1, J2 and J3."""
    _check_far(b,x)
    return SquareFunction(b,k,params,cfg,points = [x]).gstar(x,regions = True)

def brute_force_mu(f,k,params,x,cfg = None,operator = 'area'):
    """Reference square function value from the four times finer oracle table."""
    table = SquareFunction(f,k,params,cfg,points = [x],oracle = True)
    return table.area(x) if operator == 'area' else table.gstar(x)

def kernel_difference_ratios(k,rho,x0,y,z):
    """Ratios |K(y - z) - K(y - x0)|*|y - x0|^(n - rho + alpha)/|z - x0|^alpha.

    Here K(w) = Omega(w)*|w|^(rho - n). Pairs with z = x0 give zero.
    """
    n = k.dim
    def K(w):
        return k.evaluate(w)*np.linalg.norm(w,axis = -1)**(rho - n)
    far = np.linalg.norm(y - x0,axis = -1)
    near = np.linalg.norm(z - x0,axis = -1)
    lhs = np.abs(K(y - z) - K(y - x0))
    with np.errstate(divide = 'ignore',invalid = 'ignore'):
        ratio = lhs*far**(n - rho + k.alpha)/near**k.alpha
    return np.where(near > 0,ratio,0.)

def kernel_difference_bound_check(k,rho,ball,n_samples,seed = 0):
    """Largest sampled kernel difference ratio for y outside 16B and z in B.

    Points y are drawn with |y - x0|/r log-uniform in [16,1024] and z uniformly in B. The random
    stream is consumed row by row, so the first samples do not depend on n_samples.
    """
    n = k.dim
    draws = np.random.default_rng(seed).standard_normal((n_samples,2*n + 2))
    uniform = scipy.special.ndtr(draws[:,-2:])
    ydir = draws[:,:n]/np.linalg.norm(draws[:,:n],axis = -1,keepdims = True)
    zdir = draws[:,n:2*n]/np.linalg.norm(draws[:,n:2*n],axis = -1,keepdims = True)
    y = ball.center + ball.radius*16*64**uniform[:,:1]*ydir
    z = ball.center + ball.radius*uniform[:,1:]**(1/n)*zdir
    return float(np.max(kernel_difference_ratios(k,rho,ball.center,y,z)))
