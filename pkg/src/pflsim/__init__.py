"""pflsim: manipulator simulation toolkit for ISO/TS 15066 power-and-force-limiting
control, with a variable-impedance controller and PD / computed-torque baselines.

Hot kernels live in a compiled extension with a pure-Python fallback; see
``pflsim.kernels.backend_name()`` for the active backend.
"""

__version__ = "0.1.0"

from .kernels import backend_name
from .robot import DHChain, PlanarThreeR, TaskPose, load_robot
from .safety import BODY_REGIONS, EffectiveMassMethod, body_region, reduced_mass, v_rel_max
from .simulator import Scenario, TrajectoryLog, load_scenario, packaged_scenario, run

__all__ = [
    "__version__",
    "backend_name",
    "DHChain",
    "PlanarThreeR",
    "TaskPose",
    "load_robot",
    "BODY_REGIONS",
    "EffectiveMassMethod",
    "body_region",
    "reduced_mass",
    "v_rel_max",
    "Scenario",
    "TrajectoryLog",
    "load_scenario",
    "packaged_scenario",
    "run",
]
