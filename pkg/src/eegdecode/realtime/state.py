"""Session state and the debounced hand state machine.

Accepted decisions of one class must arrive k times in a row before the
hand actuates; gated decisions freeze the streaks. A command is emitted
only on an actual open<->closed transition, so two identical commands
can never follow each other.
"""

from dataclasses import dataclass, field

ACCEPTED, LOW_CONFIDENCE, ARTIFACT = "accepted", "low_confidence", "artifact"
HAND_OPEN, HAND_CLOSED, HAND_MOVING = "open", "closed", "moving"
MODE_ACTIVE, MODE_PASSIVE, MODE_IDLE = "active", "passive", "idle"


@dataclass(frozen=True)
class GatedDecision:
    raw_label: int          # 0 rest / 1 move
    margin: float           # [-1, 1]
    gate: str               # accepted | low_confidence | artifact
    window_start: int = 0   # sample index of the window
    window_end: int = 0


@dataclass(frozen=True)
class ActuatorCommand:
    name: str               # "OPEN" | "CLOSE"
    seq: int


@dataclass
class SessionState:
    mode: str = MODE_IDLE
    hand: str = HAND_OPEN
    move_streak: int = 0
    rest_streak: int = 0
    seq: int = 0                      # last emitted command sequence number
    trial_ledger: list = field(default_factory=list)
    latency_trace_ms: list = field(default_factory=list)
    dropped_samples: int = 0

    def snapshot(self):
        return {
            "mode": self.mode,
            "hand": self.hand,
            "move_streak": self.move_streak,
            "rest_streak": self.rest_streak,
            "seq": self.seq,
            "trials": len(self.trial_ledger),
            "dropped_samples": self.dropped_samples,
        }


def step_state_machine(state, decision, k_debounce=3):
    """Advance the hand state machine by one decision.

    Returns (state, ActuatorCommand | None); the state object is
    mutated in place and returned for convenience. At most one command
    per step, and only on a hand-state transition.
    """
    if decision.gate != ACCEPTED:
        return state, None
    if decision.raw_label == 1:
        state.move_streak += 1
        state.rest_streak = 0
    else:
        state.rest_streak += 1
        state.move_streak = 0

    command = None
    if state.hand == HAND_OPEN and state.move_streak >= k_debounce:
        state.seq += 1
        command = ActuatorCommand(name="CLOSE", seq=state.seq)
        state.hand = HAND_CLOSED
        state.move_streak = 0
    elif state.hand == HAND_CLOSED and state.rest_streak >= k_debounce:
        state.seq += 1
        command = ActuatorCommand(name="OPEN", seq=state.seq)
        state.hand = HAND_OPEN
        state.rest_streak = 0
    return state, command
