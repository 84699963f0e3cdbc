"""Numerical Littlewood-Paley square functions with rough kernels on Musielak-Orlicz Hardy spaces.

This code evaluates the area integral and g*_lambda functions of sampled functions, computes
Musielak-Orlicz norms, weights and atoms, and runs numerical checks of the estimates that bound
these operators on atoms.
"""

__author__ = 'lpmo developers'
__version__ = '0.1dev'

from . import quadrature
from . import kernels
from . import field
from . import musielak
from . import operators
from . import hardy
from . import config
from . import output
from . import trace
from . import verify
