from __future__ import print_function, division

import math

import numpy as np

from pytest                 import raises
from pytest                 import approx
from pytest                 import mark
from hypothesis             import given
from hypothesis             import settings
from hypothesis.strategies  import floats

from . quadrature import Ball
from . quadrature import Annulus
from . quadrature import QuadConfig
from . quadrature import DivergentIntegral
from . field      import SampledField
from . field      import PowerTail
from . musielak   import GrowthFunction
from . musielak   import WeightProfile
from . musielak   import NoFiniteNorm
from . musielak   import phi_measure
from . musielak   import uniform_aq_constant
from . musielak   import critical_indices
from . musielak   import luxemburg_norm
from . musielak   import weak_norm
from . musielak   import weak_modular
from . musielak   import modular
from . musielak   import dilation_check
from . musielak   import tail_check


def power_phi(p=1., a=0., center=None):
    return GrowthFunction(2, 'power', p, WeightProfile(2, a, center))


def disk(cells_per_radius=32, radius=1., center=(0, 0)):
    return SampledField.on_ball(Ball(center, radius), cells_per_radius)


def steps():
    box = SampledField.on_box([-1, -1], [1, 1], 0.125)
    values = np.zeros(box.shape)
    values[2:6, 3:9] = 1.5
    values[9:14, 1:4] = -0.25
    values[4:7, 10:15] = 3.
    return box.with_values(values)


@mark.parametrize("phi t expected".split(),
                  ((power_phi(), 2., 2*math.pi),
                   (power_phi(0.5), 4., 2*math.pi),
                   (power_phi(1., 0.5), 1., 4*math.pi/5)))
def test_phi_measure_unit_disk(phi, t, expected):
    assert phi_measure(phi, Ball([0, 0], 1), t) == approx(expected, rel=1e-12)


def test_weight_moment_off_center_ball():
    weight = WeightProfile(2, 2.)
    ball = Ball([0.3, 0], 1)
    expected = math.pi*(0.3**2 + 0.5)
    assert weight.moment(ball) == approx(expected, rel=1e-8)


def test_weight_moment_annulus():
    weight = WeightProfile(2, 0.5)
    region = Annulus([0, 0], 1, 2)
    expected = 2*math.pi*(2**2.5 - 1)/2.5
    assert weight.moment(region) == approx(expected, rel=1e-12)


def test_weight_moment_divergent():
    with raises(DivergentIntegral):
        WeightProfile(2, -3.).moment(Ball([0, 0], 1))


@mark.parametrize("q", (1., 1.5, 2., 3.))
def test_aq_constant_weight_is_one(q):
    balls = [Ball([0, 0], 1), Ball([3, -1], 0.2)]
    value = uniform_aq_constant(power_phi(0.5), q, balls, [0.1, 1., 10.])
    assert value == approx(1, abs=1e-12)


def test_aq_power_weight_closed_form():
    balls = [Ball([0, 0], r) for r in (0.5, 1., 4.)]
    value = uniform_aq_constant(power_phi(1., 0.5), 2., balls, [0.5, 3.])
    assert value == approx(0.8*4/3, rel=1e-10)


def test_aq_nonintegrable_weight_diverges():
    with raises(DivergentIntegral):
        uniform_aq_constant(power_phi(1., -3.), 2., [Ball([0, 0], 1)], [1.])


def test_aq_one_needs_bounded_inverse():
    with raises(DivergentIntegral):
        uniform_aq_constant(power_phi(1., 0.5), 1., [Ball([0, 0], 1)], [1.])


def test_critical_indices_constant_weight():
    indices = critical_indices(power_phi(0.7))
    assert (indices.i_phi, indices.I_phi, indices.q_phi) == (0.7, 0.7, 1.)
    assert not indices.approximate


def test_critical_indices_power_weight():
    indices = critical_indices(power_phi(1., 0.5))
    assert indices.q_phi == approx(1.25)
    assert indices.approximate


def test_critical_indices_negative_weight_exponent():
    assert critical_indices(power_phi(1., -1.)).q_phi == 1


def test_critical_indices_monotone_class():
    phi = power_phi(1., 1.)
    q_phi = critical_indices(phi).q_phi
    assert q_phi == approx(1.5)
    ball = [Ball([0, 0], 1)]
    for q in (1.55, 2., 3.):
        uniform_aq_constant(phi, q, ball, [1.])


def test_critical_indices_estimated_for_general_family():
    phi = GrowthFunction(2, 'general', function=lambda x, t: np.ones(len(x))*t/np.log(np.e + t))
    indices = critical_indices(phi)
    assert 0.7 <= indices.i_phi <= 1
    assert indices.I_phi <= 1 + 1e-9
    assert indices.approximate


def test_declared_log_profile_indices():
    phi = GrowthFunction(2, 'orlicz', profile='log')
    assert critical_indices(phi)[:2] == (1., 1.)


def test_power_family_type_constants():
    phi = power_phi(0.5, 0.5)
    points = np.array([[0.5, 0.5], [2., -1.]])
    assert phi.type_constant(0.5, [1e-3, 0.1, 0.9], [0.01, 1., 100.], points) == approx(1)
    assert phi.type_constant(1., [2., 10., 1e3], [0.01, 1., 100.], points) <= 1 + 1e-12


def test_luxemburg_norm_indicator():
    f = disk()
    assert luxemburg_norm(f, power_phi()) == approx(f.integral(), rel=1e-10)
    assert luxemburg_norm(f, power_phi()) == approx(math.pi, rel=1e-2)


def test_luxemburg_norm_weighted_indicator():
    assert luxemburg_norm(disk(), power_phi(1., 0.5)) == approx(4*math.pi/5, rel=1e-2)


def test_luxemburg_norm_of_zero():
    f = disk().scaled(0.)
    assert luxemburg_norm(f, power_phi()) == 0
    assert weak_norm(f, power_phi()) == 0


@mark.parametrize("p", (0.5, 0.8, 1.))
def test_luxemburg_norm_lp_reduction(p):
    f = steps()
    _, values = f.nonzero_cells()
    expected = (np.sum(np.abs(values)**p)*f.cell_volume)**(1/p)
    assert luxemburg_norm(f, power_phi(p)) == approx(expected, rel=1e-6)


@settings(max_examples=20, deadline=None)
@given(floats(min_value=-100, max_value=100).filter(lambda c: abs(c) > 1e-3))
def test_luxemburg_norm_scaling(c):
    f = steps()
    phi = GrowthFunction(2, 'orlicz', 0.6, WeightProfile(2, 0.5), profile='log_damped')
    assert luxemburg_norm(f.scaled(c), phi) == approx(abs(c)*luxemburg_norm(f, phi), rel=1e-9)


def test_modular_with_power_tail_closed_form():
    f = disk(8).scaled(0.)
    f.tail = PowerTail([0, 0], 1., 2., 3.)
    # integral of 2*u^-3 over |x| > 1 in the plane
    assert modular(f, power_phi(), 1.) == approx(2*math.pi*2, rel=1e-12)


def test_no_finite_norm_reports_bracket():
    with raises(NoFiniteNorm) as error:
        luxemburg_norm(disk(8), power_phi(), bracket=(1e-12, 1e-3))
    assert error.value.bracket == (1e-12, 1e-3)


def test_weak_norm_indicator_linear():
    f = disk()
    assert weak_norm(f, power_phi()) == approx(f.integral(), rel=1e-10)


def test_weak_norm_indicator_square_root():
    f = disk()
    assert weak_norm(f, power_phi(0.5)) == approx(f.integral()**2, rel=1e-10)
    assert weak_norm(f, power_phi(0.5)) == approx(math.pi**2, rel=2e-2)


@mark.parametrize("phi", (power_phi(), power_phi(0.5), power_phi(1., 0.5),
                          GrowthFunction(2, 'orlicz', profile='log')))
def test_weak_norm_below_strong_norm(phi):
    f = steps()
    assert weak_norm(f, phi) <= luxemburg_norm(f, phi)*(1 + 1e-9)


def test_weak_modular_attained_at_jump():
    f = steps()
    value, alpha = weak_modular(f, power_phi(0.5), 1.)
    _, values = f.nonzero_cells()
    assert alpha in np.abs(values)
    assert value > 0


def test_weak_modular_general_family_matches_product():
    f = steps()
    general = GrowthFunction(2, 'general', function=lambda x, t: np.linalg.norm(x, axis=-1)**0.5*np.sqrt(t))
    product = power_phi(0.5, 0.5)
    assert weak_modular(f, general, 2.)[0] == approx(weak_modular(f, product, 2.)[0], rel=1e-12)


def test_dilation_check_constant_weight():
    ratios = dilation_check(power_phi(), 1., Ball([1, 1], 0.5), [1., 2., 8.], [0.1, 10.])
    assert np.allclose(ratios, 1, atol=1e-12)


@mark.parametrize("q", (1.25, 2.))
def test_dilation_check_power_weight(q):
    lambdas = np.array([1., 2., 4., 16.])
    ratios = dilation_check(power_phi(1., 0.5), q, Ball([0, 0], 1), lambdas, [1.])
    assert np.allclose(ratios[:,0], lambdas**(2.5 - 2*q), rtol=1e-10)


@mark.parametrize("q expected".split(), ((2., 1.), (3., 0.5)))
def test_tail_check_constant_weight(q, expected):
    ratios = tail_check(power_phi(), q, Ball([0, 0], 1.), [0.1, 1., 7.])
    assert np.allclose(ratios, expected, rtol=1e-12)


def test_tail_check_scale_invariance():
    phi = power_phi(1., 0.5)
    small = tail_check(phi, 2., Ball([0, 0], 1.), [1.])
    large = tail_check(phi, 2., Ball([0, 0], 2.), [1.])
    assert small[0] == approx(2.5/1.5, rel=1e-12)
    assert large[0] == approx(small[0], rel=1e-12)


def test_tail_check_shifted_weight_uses_shells():
    phi = power_phi(1., 0.5, center=[0.5, 0])
    ratios = tail_check(phi, 2., Ball([0, 0], 1.), [1., 4.])
    assert 1 < ratios[0] < 3
    assert ratios[1] == approx(ratios[0], rel=1e-3)
