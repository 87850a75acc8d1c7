"""Receive-rate model and event simulator for windowed Interest/Data
transfer over parallel forwarding paths.

The library has four layers:

* `core` — scenario description (paths, message sizes) and the handful of
  per-path quantities everything else is built from (service rate, round
  trip time, pipeline capacity).
* `sharing` — how each forwarding strategy splits a total pending-message
  budget across paths.
* `model` — fluid cycle model of a halve-on-loss, grow-per-delivery window
  controller driving those strategies; yields steady-state receive rate.
* `sim` — per-message event simulator of the same system with drop-tail
  path buffers, used to validate the model.

`cli` wires all of it to experiment files and CSV output.
"""

from .core import (
    PathSpec,
    Scenario,
    SharingVector,
    StrategyId,
    pipeline_capacity,
    rate_msgs,
    rtt,
    scenario_with,
    validate,
)
from .sharing import (
    share_cf,
    share_fpf,
    share_pe,
    share_re,
    share_ug,
    sharing_function,
)
from .model import (
    CycleStats,
    ModelError,
    RoundStats,
    SweepPoint,
    cycle,
    sweep_model,
    wmax,
)
from .sim import (
    FPF_CAP_ESTIMATED,
    FPF_CAP_ORACLE,
    LOSS_ORACLE,
    LOSS_TIMEOUT,
    FaceState,
    SimConfig,
    SimResult,
    SimSweepPoint,
    halving_points,
    run,
    select_face,
    sweep_sim,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "PathSpec", "Scenario", "SharingVector", "StrategyId",
    "pipeline_capacity", "rate_msgs", "rtt", "scenario_with", "validate",
    "share_cf", "share_fpf", "share_pe", "share_re", "share_ug",
    "sharing_function",
    "CycleStats", "ModelError", "RoundStats", "SweepPoint",
    "cycle", "sweep_model", "wmax",
    "FPF_CAP_ESTIMATED", "FPF_CAP_ORACLE", "LOSS_ORACLE", "LOSS_TIMEOUT",
    "FaceState", "SimConfig", "SimResult", "SimSweepPoint",
    "halving_points", "run", "select_face", "sweep_sim", "validate_config",
    "__version__",
]
