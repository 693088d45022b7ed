"""Steady self-similar solutions of 2-D conservation laws near a supersonic background."""

__version__ = "0.1.0"

from .errors import SelfSimError  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .systems import EulerSystem, LinearSystem, euler_system, linear_test_system, make_system  # noqa: E402

__all__ = ["BACKEND", "EulerSystem", "LinearSystem", "SelfSimError", "__version__",
           "euler_system", "linear_test_system", "make_system"]
