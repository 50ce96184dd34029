"""Numerical laboratory for the relativistic membrane equation in 1+(2+1)D.

Evolves perturbations of light-speed traveling waves, verifies the exact
solution families and the weighted null-frame inequalities by direct
computation, and measures decay and boundedness diagnostics.
"""

__version__ = "0.1.0"

from .accel import BACKEND  # noqa: F401
