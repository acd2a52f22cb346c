"""Live decoding loop: gated streaming decisions, debounced hand state
machine, actuator wire protocol, trial protocol, latency metering, and
the WebSocket session service."""

from .actuator import SimulatedHand, encode_command, parse_ack
from .engine import StreamingDecoder, gate_window, is_artifact, offline_decisions
from .metering import LatencyStats, measure, nearest_rank_percentile
from .protocol import DecodeSession, TrialSchedule, run_trial_protocol
from .service import SessionService, PROTO_VERSION
from .sources import ReplaySource, SyntheticLiveSource
from .state import (ActuatorCommand, GatedDecision, SessionState,
                    step_state_machine)

__all__ = [
    "SimulatedHand", "encode_command", "parse_ack",
    "StreamingDecoder", "gate_window", "is_artifact", "offline_decisions",
    "LatencyStats", "measure", "nearest_rank_percentile",
    "DecodeSession", "TrialSchedule", "run_trial_protocol",
    "SessionService", "PROTO_VERSION",
    "ReplaySource", "SyntheticLiveSource",
    "ActuatorCommand", "GatedDecision", "SessionState", "step_state_machine",
]
