"""Deterministic teleoperation simulator for a quadruped-with-arm assistance robot.

The stack models a mouth-joystick pilot interface (two axes, four breath
channels, push button), routes it through a two-level mode state machine
into base locomotion or whole-body end-effector control, runs a
force-guarded autonomous mouth-touch pipeline with voice keyword commands,
and scores four everyday race tasks in a fixed-timestep, bit-replayable
world.
"""

from quadassist._kernels import KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
