"""Sequence-based networked control with virtual control inputs."""

from . import actuator, config, harness, network, numerics, plant, stability, vci
from .actuator import *
from .config import *
from .harness import *
from .network import *
from .numerics import *
from .plant import *
from .stability import *
from .vci import *

__all__ = (actuator.__all__ + config.__all__ + harness.__all__ + network.__all__ + numerics.__all__
           + plant.__all__ + stability.__all__ + vci.__all__)

__version__ = "0.1.0"
