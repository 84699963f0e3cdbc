from __future__ import print_function, division

import math

import numpy as np

from pytest                 import raises
from pytest                 import approx

from . quadrature import Ball
from . field      import SampledField
from . field      import PowerTail


def test_indicator_on_ball():
    ball = Ball([1, -2], 2.)
    f = SampledField.on_ball(ball, 32)
    assert f.shape == (64, 64)
    assert f.cell_size == approx(1/16)
    assert f.integral() == approx(ball.volume, rel=1e-2)
    assert f.support_radius() >= 2 - f.cell_size
    assert np.allclose(f.support_center(), [1, -2])


def test_profile_on_ball():
    f = SampledField.on_ball(Ball([0, 0], 1), 16, profile=lambda x: np.sign(x[:,0]))
    assert abs(f.integral()) < 1e-12
    assert f.sup_norm() == 1


def test_evaluate_matches_cell_values():
    f = SampledField.on_box([0, 0], [1, 2], 0.25, function=lambda x: x[:,0] + 10*x[:,1])
    centers = f.centers()
    assert np.allclose(f.evaluate(centers), centers[:,0] + 10*centers[:,1])
    assert f.evaluate(np.array([[5., 5.]]))[0] == 0


def test_support_ball_is_enforced():
    box = SampledField.on_box([-1, -1], [1, 1], 0.5, function=lambda x: np.ones(len(x)))
    with raises(RuntimeError):
        SampledField(box.origin, box.cell_size, box.values, support_ball=Ball([0, 0], 0.5))


def test_field_with_tail():
    tail = PowerTail([0, 0], 1., 2., 3.)
    f = SampledField(np.array([-1., -1.]), 0.5, np.zeros((4, 4)), tail=tail)
    assert f.evaluate(np.array([[2., 0.]]))[0] == approx(0.25)
    assert f.sup_norm() == 2
    assert not f.is_zero()


def test_power_tail_level_sets():
    tail = PowerTail([0, 0, 0], 2., 1., 4.)
    region = tail.level_set(1/16.)
    assert region.r_in == 2 and region.r_out == approx(4)
    assert tail.level_set(1.) is None
    with raises(RuntimeError):
        tail.level_set(0.)
