"""previz: an authoring engine for generative video previsualization.

Block rough 3D scenes and timelines, render deterministic conditioning
frames (color, inverse depth, entity ids, pose overlays), map resemblance
levels to generation guidance, remix external skeleton motion, and drive
image/video generation jobs against a pluggable backend.
"""

__version__ = "0.1.0"

from .geometry import RotationQ, Transform, Vec3  # noqa: F401
from .scene import Camera, Light, ProxyGeometry, Scene, SceneEntity  # noqa: F401
from .timeline import Clip, Keyframe, MotionPath, Timeline, Track  # noqa: F401
