"""Abstract-image rendering, wrapped heatmap codecs and reconstruction for 3D human pose."""

from .env import CameraIntrinsics, EnvConfig, SyntheticEnvironment, build_environment, camera_rotation
from .evaluation import (EvalReport, Reconstruction, mpjpe, pa_mpjpe, quantization_bound_mm,
                         reconstruct, rotation_aligned_mpjpe)
from .posecodec import decode_pose, encode_pose
from .renderer import AbstractImage, RenderConfig, render_abstract, render_view, render_with_missing_parts
from .skeleton import TOPOLOGY, BoneDecomposition, Pose, compose_pose, decompose_pose, forward_vector
from .viewpoint import CodecParams, decode_viewpoint, encode_viewpoint, rotate_camera_array

__version__ = "0.1.0"
