"""NERO: non-equivariance revealed on orbits.

A model-agnostic evaluation engine that sweeps inputs along transform-group
orbits, compares model outputs against transformed ground truth (or a
consensus stand-in), and materializes individual, aggregate, and
dimension-reduced views of non-equivariance.
"""

__version__ = "0.1.0"

from .engine import EvalSample, NeroRecord, NeroResult, individual_nero, run  # noqa: F401
from .groups import Orbit, OrbitSpec, enumerate_orbit  # noqa: F401
