"""LiDAR SLAM with a pose-cell attractor network, local view cells and an
experience map."""

from .geometry import Pose, PoseDelta, Scan
from .kernels import BACKEND
from .pipeline import Slam, SlamConfig, StepReport, run

__all__ = ["BACKEND", "Pose", "PoseDelta", "Scan", "Slam", "SlamConfig", "StepReport", "run"]
__version__ = "0.1.0"
