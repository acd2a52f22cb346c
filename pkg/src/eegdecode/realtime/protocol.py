"""Session orchestration: decisions drive the debounced hand state
machine and the actuator; the cue-based trial protocol runs on the
sample clock so seeded runs are bit-reproducible.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import Aborted, EmptyInput
from ..evaluate import evaluate
from .actuator import SimulatedHand, encode_command, parse_ack
from .metering import measure
from .state import (ActuatorCommand, HAND_CLOSED, HAND_OPEN, MODE_ACTIVE,
                    MODE_PASSIVE, SessionState, step_state_machine)


@dataclass
class TrialRecord:
    trial: int
    cued: int        # 0 rest / 1 move
    decoded: int
    correct: bool

    def to_dict(self):
        return {"trial": self.trial, "cued": self.cued,
                "decoded": self.decoded, "correct": self.correct}


class DecodeSession:
    """Couples a StreamingDecoder to the state machine and actuator.

    process_chunk() is the single entry point; callbacks fire per
    decision and per emitted command (used by the session service).
    """

    def __init__(self, engine, actuator=None, k_debounce=3,
                 passive_period_s=4.0):
        self.engine = engine
        self.actuator = actuator if actuator is not None else SimulatedHand()
        self.state = SessionState()
        self.k_debounce = int(k_debounce)
        self.passive_period_s = float(passive_period_s)
        self.on_decision = []   # callbacks (decision, state)
        self.on_command = []    # callbacks (command, state)
        self._sample_clock = 0
        self._passive_next_flip = 0
        self.command_log = []   # (sample_time, ActuatorCommand)

    def _emit(self, command):
        line = encode_command(command.name, command.seq)
        reply = self.actuator.exchange(line)
        seq, err = parse_ack(reply)
        if err is not None or seq != command.seq:
            raise IOError(f"actuator rejected {command}: {reply!r}")
        self.command_log.append((self._sample_clock, command))
        for cb in self.on_command:
            cb(command, self.state)

    @property
    def sample_clock(self):
        return self._sample_clock

    def _passive_tick(self):
        period_n = int(self.passive_period_s * self.engine.fs)
        if self._passive_next_flip == 0:
            self._passive_next_flip = self._sample_clock + period_n // 2
        while self._sample_clock >= self._passive_next_flip:
            self.state.seq += 1
            if self.state.hand == HAND_OPEN:
                cmd = ActuatorCommand(name="CLOSE", seq=self.state.seq)
                self.state.hand = HAND_CLOSED
            else:
                cmd = ActuatorCommand(name="OPEN", seq=self.state.seq)
                self.state.hand = HAND_OPEN
            self._emit(cmd)
            self._passive_next_flip += period_n // 2

    def process_chunk(self, chunk):
        """Push one chunk; returns the decisions it completed."""
        decisions = self.engine.push_samples(chunk)
        self._sample_clock += np.asarray(chunk).shape[1]
        self.state.dropped_samples = self.engine.dropped_samples
        for d in decisions:
            self.state.latency_trace_ms.append(self.engine.latency_trace_ms[-1])
            if self.state.mode == MODE_ACTIVE:
                _, command = step_state_machine(self.state, d, self.k_debounce)
                if command is not None:
                    self._emit(command)
            for cb in self.on_decision:
                cb(d, self.state)
        if self.state.mode == MODE_PASSIVE:
            self._passive_tick()
        return decisions


@dataclass
class TrialSchedule:
    n_trials: int = 15
    cue_s: float = 4.0
    rest_s: float = 3.0


def run_trial_protocol(session, source, schedule, rng=None, chunk=125,
                       should_abort=None, on_cue=None, on_result=None):
    """Cue-based protocol on the sample clock.

    Alternates randomized move/rest cues with rest gaps; a trial's
    decoded label is the first debounced command whose debounce
    completes inside the cue window (CLOSE -> move, OPEN -> rest,
    none -> rest). Returns (ledger, EvalReport, rates dict). Raises
    Aborted (carrying the partial ledger) when should_abort() fires.
    """
    if schedule.n_trials <= 0:
        raise EmptyInput("protocol needs at least one trial")
    rng = np.random.default_rng(0) if rng is None else rng
    fs = session.engine.fs
    session.state.mode = MODE_ACTIVE

    cues = [int(rng.integers(0, 2)) for _ in range(schedule.n_trials)]
    cue_n = int(schedule.cue_s * fs)
    rest_n = int(schedule.rest_s * fs)
    t0 = session.sample_clock
    phases = []  # (start, end, trial_idx, cued) for cue windows
    at = t0 + rest_n
    for i, cued in enumerate(cues):
        phases.append((at, at + cue_n, i, cued))
        at += cue_n + rest_n
    total_end = at

    source.set_intent(0)
    ledger = []
    phase_i = -1  # -1 = lead-in rest
    commands_seen = 0

    def finish_trial(idx, cued, start, end):
        decoded = 0
        for t, cmd in session.command_log:
            if start <= t < end:
                decoded = 1 if cmd.name == "CLOSE" else 0
                break
        rec = TrialRecord(trial=idx, cued=cued, decoded=decoded,
                          correct=decoded == cued)
        ledger.append(rec)
        session.state.trial_ledger.append(rec.to_dict())
        if on_result:
            on_result(rec)

    while session.sample_clock < total_end:
        if should_abort is not None and should_abort():
            raise Aborted([r.to_dict() for r in ledger])
        now = session.sample_clock
        # advance cue phases
        while phase_i + 1 < len(phases) and now >= phases[phase_i + 1][0]:
            phase_i += 1
            start, end, idx, cued = phases[phase_i]
            source.set_intent(cued)
            if on_cue:
                on_cue(idx, cued)
        if phase_i >= 0:
            start, end, idx, cued = phases[phase_i]
            if now >= end and len(ledger) == idx:
                source.set_intent(0)  # inter-trial rest
                finish_trial(idx, cued, start, end)
        data = source.read(chunk)
        if data is None:
            break
        session.process_chunk(data)
        commands_seen = len(session.command_log)

    # close out any trial whose cue window ended at/after the last chunk
    for start, end, idx, cued in phases:
        if len(ledger) == idx:
            finish_trial(idx, cued, start, end)

    decoded = np.array([r.decoded for r in ledger])
    cued_arr = np.array([r.cued for r in ledger])
    report = evaluate(decoded, cued_arr, level="trial",
                      trial_map=np.arange(len(decoded)), bootstrap_seed=0)
    if session.engine.latency_trace_ms:
        report.latency = measure(session.engine.latency_trace_ms,
                                 cpu_seconds=sum(session.engine.cpu_trace_s)).to_dict()
    move_mask = cued_arr == 1
    rates = {
        "tp_rate": float((decoded[move_mask] == 1).mean()) if move_mask.any() else 0.0,
        "fp_rate": float((decoded[~move_mask] == 1).mean()) if (~move_mask).any() else 0.0,
        "n_trials": len(ledger),
        "n_commands": commands_seen,
    }
    return ledger, report, rates
