from __future__ import print_function, division

import math

import numpy as np
import scipy.special

from pytest                 import raises
from pytest                 import approx
from pytest                 import mark
from hypothesis             import given
from hypothesis             import settings
from hypothesis.strategies  import floats
from hypothesis.strategies  import sampled_from

from . quadrature import QuadConfig
from . kernels    import Kernel
from . kernels    import OperatorParams
from . kernels    import KernelNotAdmissible
from . kernels    import HypothesisViolation
from . kernels    import builtin_kernels
from . kernels    import kernel_from_id
from . kernels    import check_cancellation
from . kernels    import estimate_lip_seminorm
from . kernels    import holder_offset


@mark.parametrize("dim", (2, 3))
def test_builtin_kernels_cancel(dim):
    cfg = QuadConfig()
    kernels = builtin_kernels(dim)
    assert [k.name for k in kernels] == ['harmonic1', 'harmonic3', 'holder:0.5']
    for k in kernels:
        assert check_cancellation(k, cfg) < 1e-8


@settings(max_examples=50, deadline=None)
@given(floats(min_value=-10, max_value=10),
       floats(min_value=-10, max_value=10),
       sampled_from((0.5, 2., 10.)),
       sampled_from(('harmonic1', 'harmonic3', 'holder:0.5')))
def test_kernel_homogeneity(x1, x2, c, kernel_id):
    k = kernel_from_id(kernel_id, 2)
    x = np.array([[x1, x2]])
    if np.all(x == 0):
        return
    assert k.evaluate(c*x)[0] == approx(k.evaluate(x)[0], rel=1e-12, abs=1e-12)


def test_kernel_at_origin_is_zero():
    k = kernel_from_id('harmonic1', 2)
    assert k.evaluate(np.zeros((1, 2)))[0] == 0


def test_constant_kernel_rejected():
    k = Kernel('constant', 2, lambda u: np.ones(u.shape[:-1]), 1.)
    assert check_cancellation(k, QuadConfig()) == approx(2*math.pi)
    with raises(KernelNotAdmissible):
        k.validate(QuadConfig())


def test_holder_offset_closed_forms():
    alpha = 0.5
    expected = scipy.special.gamma(0.5*(alpha + 1))/(math.sqrt(math.pi)*scipy.special.gamma(0.5*alpha + 1))
    assert holder_offset(2, alpha) == approx(expected, rel=1e-7)
    assert holder_offset(3, alpha) == approx(1/(alpha + 1), rel=1e-7)


def test_lip_seminorm_of_coordinate():
    k = kernel_from_id('harmonic1', 2)
    estimate = estimate_lip_seminorm(k, 20000)
    assert 0.9 < estimate <= 1 + 1e-9


def test_lip_seminorm_of_cos3():
    k = kernel_from_id('harmonic3', 2)
    assert estimate_lip_seminorm(k, 20000) == approx(3, rel=0.05)


def test_lip_seminorm_of_constant():
    k = Kernel('constant', 2, lambda u: np.ones(u.shape[:-1]), 0.5)
    assert estimate_lip_seminorm(k, 1000) == 0


def test_lip_seminorm_nondecreasing_in_pairs():
    k = kernel_from_id('holder:0.5', 2)
    estimates = [estimate_lip_seminorm(k, n) for n in (10, 100, 1000, 10000)]
    assert estimates == sorted(estimates)


def test_holder_kernel_not_lipschitz():
    k = kernel_from_id('holder:0.5', 2)
    assert estimate_lip_seminorm(k, 20000) <= k.lip_const + 1e-9
    assert estimate_lip_seminorm(k, 20000, alpha=1.) > 10


def test_unknown_kernel_id():
    with raises(RuntimeError):
        kernel_from_id('harmonic7', 2)


def test_operator_params_windows():
    params = OperatorParams(2, rho=1.5, beta=0.4, lam=3.)
    assert params.beta_window(1.) == 0.5
    assert params.beta_window(0.3) == 0.3
    assert params.beta_window(1., 'gstar') == 0.5
    assert params.scale_exponent == 6
    params.check_window(1.)
    with raises(HypothesisViolation):
        params.check_window(0.3)


def test_gstar_window_from_lambda():
    params = OperatorParams(2, rho=2., beta=0.3, lam=2.3)
    assert params.beta_window(1., 'gstar') == approx(0.2)
    with raises(HypothesisViolation):
        params.check_window(1., 'gstar')


@mark.parametrize("args", ((2, 1., 0.1), (2, 1.5, 0.), (2, 1.5, 0.1, 2.)))
def test_invalid_operator_params(args):
    with raises(HypothesisViolation):
        OperatorParams(*args)
