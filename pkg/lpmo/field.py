"""Piecewise-constant functions sampled on axis-aligned grids.
"""
from __future__ import print_function, division

import numpy as np

from . import quadrature

class PowerTail(object):
    """Radial power-law envelope |f(x)| = A*(|x - c|/R)^(-gamma) outside B(c,R).

    Args:
        center(array): Center c.
        radius(float): Radius R where the tail starts.
        amplitude(float): Value A of the tail at radius R.
        exponent(float): Decay exponent gamma > 0.
    """
    def __init__(self,center,radius,amplitude,exponent):
        self.center = np.array(center,dtype = float).reshape(-1)
        if not (radius > 0 and amplitude >= 0 and exponent > 0):
            raise RuntimeError('Invalid power tail (R=%r,A=%r,gamma=%r).' % (radius,amplitude,exponent))
        self.radius = float(radius)
        self.amplitude = float(amplitude)
        self.exponent = float(exponent)

    def evaluate(self,points):
        distance = np.linalg.norm(np.asarray(points) - self.center,axis = -1)
        scaled = np.maximum(distance,self.radius)/self.radius
        return np.where(distance >= self.radius,self.amplitude*scaled**(-self.exponent),0.)

    def level_radius(self,alpha):
        """Radius where the tail falls to alpha."""
        return self.radius*(self.amplitude/alpha)**(1/self.exponent)

    def level_set(self,alpha):
        """The annulus {|x - c| >= R, tail(x) > alpha}, or None when it is empty."""
        if alpha <= 0:
            raise RuntimeError('Tail level sets need alpha > 0.')
        if alpha >= self.amplitude:
            return None
        return quadrature.Annulus(self.center,self.radius,self.level_radius(alpha))

class SampledField(object):
    """Function that is constant on each cell of an axis-aligned grid and zero outside it.

    Cell (i_1,...,i_n) covers origin + h*[i_k,i_k+1) along each axis and carries the value
    values[i_1,...,i_n]. Integrals of functions of f are cell-center sums weighted by h^n, and level
    sets are finite unions of cells. An optional :class:`PowerTail` describes f beyond the grid.

    Args:
        origin(array): Lower corner of the grid.
        cell_size(float): Cell edge length h.
        values(numpy.ndarray): Array of cell values with n dimensions.
        support_ball(Ball): Optional ball that contains the support of the sampled values.
        tail(PowerTail): Optional closed-form tail.

    Raises:
        RuntimeError: Inconsistent shapes or nonzero values outside the support ball.
    """
    def __init__(self,origin,cell_size,values,support_ball = None,tail = None):
        self.origin = np.array(origin,dtype = float).reshape(-1)
        self.values = np.asarray(values,dtype = float)
        quadrature.check_dim(len(self.origin))
        if self.values.ndim != len(self.origin):
            raise RuntimeError('Field values have %d dimensions but the grid has %d.' % (
                self.values.ndim,len(self.origin)))
        if not cell_size > 0:
            raise RuntimeError('Cell size must be positive, got %r.' % (cell_size,))
        self.cell_size = float(cell_size)
        self.support_ball = support_ball
        self.tail = tail
        self._nonzero = None
        if support_ball is not None:
            centers,_ = self.nonzero_cells()
            if np.any(~support_ball.contains(centers,closed = True)):
                raise RuntimeError('Field has nonzero cells outside its support ball %s.' %
                    support_ball.description())

    @property
    def dim(self):
        return len(self.origin)

    @property
    def shape(self):
        return self.values.shape

    @property
    def cell_volume(self):
        return self.cell_size**self.dim

    def axes(self):
        """Cell-center coordinates along each axis."""
        return [self.origin[k] + self.cell_size*(np.arange(size) + 0.5)
            for k,size in enumerate(self.shape)]

    def centers(self):
        """Cell centers as an array of shape (ncells,n) in C order."""
        grids = np.meshgrid(*self.axes(),indexing = 'ij')
        return np.stack([g.reshape(-1) for g in grids],axis = -1)

    def nonzero_cells(self):
        """Centers and values of the cells where the field is nonzero."""
        if self._nonzero is None:
            flat = self.values.reshape(-1)
            keep = np.flatnonzero(flat)
            index = np.stack(np.unravel_index(keep,self.shape),axis = -1)
            centers = self.origin + self.cell_size*(index + 0.5)
            self._nonzero = (centers,flat[keep])
        return self._nonzero

    def is_zero(self):
        return len(self.nonzero_cells()[1]) == 0 and (self.tail is None or self.tail.amplitude == 0)

    def sup_norm(self):
        values = self.nonzero_cells()[1]
        sup = np.max(np.abs(values)) if len(values) else 0.
        if self.tail is not None:
            sup = max(sup,self.tail.amplitude)
        return float(sup)

    def support_center(self):
        if self.support_ball is not None:
            return self.support_ball.center
        centers,_ = self.nonzero_cells()
        if len(centers) == 0:
            return self.origin + 0.5*self.cell_size*np.array(self.shape)
        return 0.5*(np.min(centers,axis = 0) + np.max(centers,axis = 0))

    def support_radius(self):
        """Radius about support_center() containing every nonzero cell in full."""
        centers,_ = self.nonzero_cells()
        if len(centers) == 0:
            return 0.
        corner = 0.5*self.cell_size*np.sqrt(self.dim)
        return float(np.max(np.linalg.norm(centers - self.support_center(),axis = -1)) + corner)

    def integral(self):
        return float(np.sum(self.nonzero_cells()[1])*self.cell_volume)

    def evaluate(self,points):
        """Evaluate the field (including any tail) at points with shape (...,n)."""
        points = np.asarray(points,dtype = float)
        index = np.floor((points - self.origin)/self.cell_size).astype(int)
        inside = np.all((index >= 0) & (index < np.array(self.shape)),axis = -1)
        clipped = np.clip(index,0,np.array(self.shape) - 1)
        values = np.where(inside,self.values[tuple(np.moveaxis(clipped,-1,0))],0.)
        if self.tail is not None:
            values = values + np.where(inside,0.,self.tail.evaluate(points))
        return values

    def with_values(self,values,tail = None):
        """Field on the same grid with new values."""
        return SampledField(self.origin,self.cell_size,values,tail = tail)

    def scaled(self,factor):
        tail = None
        if self.tail is not None:
            tail = PowerTail(self.tail.center,self.tail.radius,abs(factor)*self.tail.amplitude,
                self.tail.exponent)
        return SampledField(self.origin,self.cell_size,factor*self.values,self.support_ball,tail)

    @classmethod
    def on_ball(cls,ball,cells_per_radius,profile = None):
        """Sample a function on a grid covering the cube [c - r,c + r]^n.

        Args:
            ball(Ball): The ball B(c,r). Cells whose centers lie outside the open ball are zero.
            cells_per_radius(int): Cells per radius, so that h = r/cells_per_radius.
            profile(callable): Vectorized function of points (ncells,n), defaults to one.

        Returns:
            SampledField: Field with support_ball set to ball.
        """
        size = 2*int(cells_per_radius)
        cell_size = ball.radius/int(cells_per_radius)
        field = cls(ball.center - ball.radius,cell_size,np.zeros((size,)*ball.dim))
        centers = field.centers()
        values = np.zeros(len(centers))
        inside = ball.contains(centers)
        values[inside] = 1. if profile is None else profile(centers[inside])
        return cls(field.origin,cell_size,values.reshape(field.shape),support_ball = ball)

    @classmethod
    def on_box(cls,lower,upper,cell_size,function = None):
        """Sample a function on cell centers of a grid covering the box [lower,upper]."""
        lower = np.array(lower,dtype = float)
        shape = tuple(np.ceil((np.array(upper,dtype = float) - lower)/cell_size - 1e-9).astype(int))
        field = cls(lower,cell_size,np.zeros(shape))
        if function is None:
            return field
        return field.with_values(np.asarray(function(field.centers()),dtype = float).reshape(shape))
