"""Share-constrained proportionally fair network slicing toolkit.

Subpackages by concern:

  netmodel      traffic model, flow conservation, load profiles
  allocation    per-snapshot rate allocation (SS / GPS / SCPF)
  btd           closed-form mean BTD and gain expressions
  mcsim         Monte Carlo validation engines
  dimensioning  share dimensioning and the max-min share LP
  game          admission-control traffic-shaping game
  radio         radio-environment scenario generator and calibration
  config, cli   scenario files and the command-line front end
"""

from .netmodel import (
    CapacityModel,
    LoadProfile,
    SliceSpec,
    TrafficModel,
    derive_load_profile,
    load_geometry,
    solve_flow_conservation,
)
from .allocation import RateAllocation, Snapshot, rates_gps, rates_scpf, rates_ss

__all__ = [
    "CapacityModel",
    "LoadProfile",
    "SliceSpec",
    "TrafficModel",
    "derive_load_profile",
    "load_geometry",
    "solve_flow_conservation",
    "RateAllocation",
    "Snapshot",
    "rates_gps",
    "rates_scpf",
    "rates_ss",
]

__version__ = "0.1.0"
