"""Kernel backend selection.

The hot kernels (chain FK, Jacobian, DLS solve, capsule distances) exist
twice: a Cython extension (``_core``) and a NumPy implementation
(``pure``).  The compiled module is preferred when it built; set
``QUADASSIST_PURE_PY=1`` to force the NumPy path (used by the benchmark
and the backend-equivalence tests).
"""

import os

from quadassist._kernels import pure

if os.environ.get("QUADASSIST_PURE_PY"):
    impl = pure
else:
    try:
        from quadassist._kernels import _core as impl  # type: ignore[no-redef]
    except ImportError:
        impl = pure

KERNEL_BACKEND = impl.BACKEND

chain_frames = impl.chain_frames
ee_pose = impl.ee_pose
jacobian = impl.jacobian
dls_rates = impl.dls_rates
proxy_points = impl.proxy_points
pair_separations = impl.pair_separations
quat_from_matrix = impl.quat_from_matrix

__all__ = [
    "KERNEL_BACKEND",
    "chain_frames",
    "ee_pose",
    "jacobian",
    "dls_rates",
    "proxy_points",
    "pair_separations",
    "quat_from_matrix",
    "impl",
    "pure",
]
