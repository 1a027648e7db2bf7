"""QoE-aware resource allocation for video clients over OFDMA wireless and EPON."""

from .errors import (ConfigError, DomainError, InfeasibleError, InfeasibleSlaError,
                     InstanceTooLargeError, QoeSimError, UnservableUeError)
from .qoe import (CLIENT_TYPES, GOOGLEPLUS, ICHAT, SKYPE, build_profile_table, call_drop_of_mos,
                  mos_g1070, send_rate, video_rate)
from .simulator import ScenarioConfig, run, summarize, sweep

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainError", "InfeasibleError", "InfeasibleSlaError",
    "InstanceTooLargeError", "QoeSimError", "UnservableUeError",
    "CLIENT_TYPES", "GOOGLEPLUS", "ICHAT", "SKYPE", "build_profile_table", "call_drop_of_mos",
    "mos_g1070", "send_rate", "video_rate", "ScenarioConfig", "run", "summarize", "sweep",
]
