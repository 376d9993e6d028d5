"""Random walk disconnection of discrete cylinders.

Subpackages and modules
-----------------------
lattice      vertex sets, boxes and boundaries on the cylinder and on Z^D
potential    exact Green functions, equilibrium measures and capacities
walk         walk paths, skeleton, local times and excursion schedules
disconnect   disconnection time of the cylinder by the walk trace
interlace    random interlacement sampling and occupancy fields
percolation  vacant-set crossing estimates and critical-level brackets
limitlaw     law of the local-time threshold time of Brownian motion
harness      configuration, experiments, verification and the CLI
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
