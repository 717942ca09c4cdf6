"""Pose interpolation between annotated keyframes.

Container poses are annotated sparsely (one keyframe every few frames) and
queried per frame by the handover replay: translations are interpolated
linearly, rotations spherically along the shortest arc. Queries past the
last keyframe return the final pose, which models the container being held
in place once the recording ends.
"""

from __future__ import annotations

import math
from bisect import bisect_right

import numpy as np

from .model import PoseTrack

# Above this quaternion dot product the arc is so short that linear
# interpolation is numerically safer than the spherical formula.
_SLERP_LERP_DOT = 0.9995


def slerp(q0, q1, t: float) -> np.ndarray:
    """Interpolate between two unit quaternions along the shortest arc."""
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    q0 = q0 / np.linalg.norm(q0)
    q1 = q1 / np.linalg.norm(q1)
    dot = float(np.dot(q0, q1))
    if dot < 0.0:
        q1 = -q1
        dot = -dot
    if dot > _SLERP_LERP_DOT:
        out = q0 + t * (q1 - q0)
        return out / np.linalg.norm(out)
    theta = math.acos(min(dot, 1.0))
    sin_theta = math.sin(theta)
    w0 = math.sin((1.0 - t) * theta) / sin_theta
    w1 = math.sin(t * theta) / sin_theta
    return w0 * q0 + w1 * q1


def interpolate_pose(track: PoseTrack, frame: float) -> tuple[np.ndarray, np.ndarray]:
    """Container pose at an arbitrary frame.

    Exact at keyframes; frames past the last keyframe clamp to the final
    pose. Frames before the first keyframe are an error.
    """
    frames = track.frames
    if frame < frames[0]:
        raise ValueError(f"frame {frame} precedes first keyframe {frames[0]}")
    if frame >= frames[-1]:
        return track.translations[-1].copy(), track.rotations[-1].copy()
    idx = bisect_right(frames, frame) - 1
    f0, f1 = frames[idx], frames[idx + 1]
    u = (frame - f0) / (f1 - f0)
    if u == 0.0:
        return track.translations[idx].copy(), track.rotations[idx].copy()
    translation = (1.0 - u) * track.translations[idx] + u * track.translations[idx + 1]
    rotation = slerp(track.rotations[idx], track.rotations[idx + 1], u)
    return translation, rotation
