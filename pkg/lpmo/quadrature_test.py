from __future__ import print_function, division

import math
import argparse

import numpy as np
import scipy.special

from pytest                 import raises
from pytest                 import approx
from pytest                 import mark
from hypothesis             import given
from hypothesis             import settings
from hypothesis.strategies  import floats

from . quadrature import Ball
from . quadrature import Annulus
from . quadrature import QuadConfig
from . quadrature import SpherePoint
from . quadrature import DivergentIntegral
from . quadrature import TruncationDominates
from . quadrature import sphere_integral
from . quadrature import radial_singular_integral
from . quadrature import ball_integral
from . quadrature import annulus_integral
from . quadrature import cone_region_integral
from . quadrature import dyadic_tail_integral
from . quadrature import sphere_rule
from . quadrature import periodic_sphere_rule


@mark.parametrize("dim area".split(), ((2, 2*math.pi), (3, 4*math.pi)))
def test_sphere_integral_of_one(dim, area):
    result = sphere_integral(lambda u: np.ones(len(u)), dim, QuadConfig())
    assert result.value == approx(area, abs=1e-10)
    assert result.converged


@mark.parametrize("dim", (2, 3))
def test_sphere_integral_of_odd_coordinate(dim):
    result = sphere_integral(lambda u: u[:,0], dim, QuadConfig())
    assert abs(result.value) < 1e-10


def test_sphere_integral_of_cos3():
    result = sphere_integral(lambda u: 4*u[:,0]**3 - 3*u[:,0], 2, QuadConfig())
    assert abs(result.value) < 1e-10


def test_sphere_integral_zonal_moment():
    result = sphere_integral(lambda u: u[:,0]**2, 3, QuadConfig())
    assert result.value == approx(4*math.pi/3, rel=1e-10)


@mark.parametrize("dim", (2, 3))
def test_sphere_rule_points_are_unit_vectors(dim):
    points, weights = sphere_rule(dim, 64)
    assert np.allclose(np.linalg.norm(points, axis=-1), 1)
    points, weights, half = periodic_sphere_rule(dim, 64)
    assert np.sum(weights) == approx(np.sum(half))


def test_circle_rule_converges_exponentially():
    expected = 2*math.pi*scipy.special.i0(1.)
    points, weights = sphere_rule(2, 16)
    assert len(weights) == 16
    assert np.sum(weights*np.exp(points[:,0])) == approx(expected, rel=1e-13)
    result = sphere_integral(lambda u: u[:,0]**2, 2, QuadConfig(angular_nodes=16))
    assert result.value == approx(math.pi, abs=1e-12)
    assert result.n_evals == 16 + 32


def test_graded_circle_rule_handles_kinks():
    cfg = QuadConfig(angular_nodes=64, rel_tol=1e-12, abs_tol=1e-12)
    # |cos| has kinks on the x_2 axis, where the graded panels put their edges.
    result = sphere_integral(lambda u: np.abs(u[:,0]), 2, cfg, graded=True)
    assert result.value == approx(4., rel=1e-10)


def test_sphere_point_embedding():
    assert np.allclose(SpherePoint([0.5*math.pi]).embed(), [0, 1])
    assert np.allclose(SpherePoint([0., 1.]).embed(), [1, 0, 0])


def test_radial_singular_integral_closed_forms():
    assert radial_singular_integral(0.5, 0, 8).value == approx(8**1.5/1.5, rel=1e-14)
    assert radial_singular_integral(-1, 1, math.e).value == approx(1)
    assert radial_singular_integral(-3, 2, np.inf).value == approx(1/8)
    assert radial_singular_integral(0.5, 0, 8).est_error == 0


@mark.parametrize("exponent lo hi".split(), ((-1, 0, 1), (-2.5, 0, 1), (-1, 1, np.inf), (0.5, 1, np.inf)))
def test_radial_singular_integral_divergent(exponent, lo, hi):
    with raises(DivergentIntegral):
        radial_singular_integral(exponent, lo, hi)


def test_ball_integral_radial_function():
    result = ball_integral(lambda x: np.linalg.norm(x, axis=-1), Ball([0, 0], 1), QuadConfig())
    assert result.value == approx(2*math.pi/3, rel=1e-10)


def test_ball_integral_dilation_covariance():
    g = lambda x: x[:,0]**2 + np.abs(x[:,1]) + 1
    cfg = QuadConfig()
    big = ball_integral(g, Ball([0, 0], 2), cfg).value
    small = ball_integral(lambda x: g(2*x), Ball([0, 0], 1), cfg).value
    assert big == approx(4*small, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(floats(min_value=-5, max_value=5),
       floats(min_value=-5, max_value=5),
       floats(min_value=0.01, max_value=20))
def test_ball_integral_of_constant(cx, cy, radius):
    ball = Ball([cx, cy], radius)
    result = ball_integral(lambda x: np.full(len(x), 3.), ball, QuadConfig())
    assert result.value == approx(3*ball.volume, rel=1e-10)


def test_annulus_integral_volume():
    region = Annulus([1, 2, 3], 1, 2)
    result = annulus_integral(lambda x: np.ones(len(x)), region, QuadConfig())
    assert result.value == approx(region.volume, rel=1e-10)


def test_dyadic_tail_integral_power_decay():
    result = dyadic_tail_integral(lambda x: np.linalg.norm(x, axis=-1)**-4, [0, 0], 1., QuadConfig())
    assert result.value == approx(math.pi, rel=1e-8)


def test_dyadic_tail_integral_divergent():
    with raises(DivergentIntegral):
        dyadic_tail_integral(lambda x: np.linalg.norm(x, axis=-1)**-2, [0, 0], 1., QuadConfig())


def test_cone_region_integral_truncated_cone_volume():
    cfg = QuadConfig(radial_order=4, angular_nodes=16)
    h = lambda y, t: (t < 1).astype(float)
    result = cone_region_integral(h, [0, 0], 'inside_cone', cfg)
    assert result.value == approx(math.pi/3*(1 - cfg.t_min**3), rel=1e-10)


def test_cone_region_integral_power_scale_tail():
    cfg = QuadConfig(angular_nodes=64, rel_tol=1e-12, abs_tol=1e-12)
    h = lambda y, t: np.where((t > 1) & (np.linalg.norm(y, axis=-1) < 1), t**-5, 0.)
    result = cone_region_integral(h, [0, 0], 'full', cfg)
    assert result.value == approx(math.pi/4, rel=1e-3)


def test_cone_region_integral_truncation_dominates():
    cfg = QuadConfig(radial_order=4, angular_nodes=16, t_max=4.)
    h = lambda y, t: np.where((t > 1) & (np.linalg.norm(y, axis=-1) < 1), 1., 0.)
    with raises(TruncationDominates):
        cone_region_integral(h, [0, 0], 'full', cfg)


def test_unknown_cone_region():
    with raises(RuntimeError):
        cone_region_integral(lambda y, t: t, [0, 0], 'sideways', QuadConfig())


@mark.parametrize("changes", ({'t_min': 2., 't_max': 1.}, {'rel_tol': 0}, {'max_subdivisions': 0},
                              {'singular_split_radius': 1.5}))
def test_invalid_quad_config(changes):
    with raises(RuntimeError):
        QuadConfig(**changes)


def test_quad_config_from_args_overrides_base():
    parser = argparse.ArgumentParser()
    QuadConfig.add_args(parser)
    args = parser.parse_args(['--rel-tol', '1e-3'])
    base = QuadConfig(cells_per_radius=16)
    cfg = QuadConfig.from_args(args, base=base)
    assert cfg.rel_tol == 1e-3
    assert cfg.cells_per_radius == 16
    assert cfg.abs_tol == base.abs_tol


def test_quad_config_unknown_key():
    with raises(RuntimeError):
        QuadConfig.from_dict({'relative_tolerance': 1e-3})
