"""WebSocket session service: live telemetry out, operator commands in.

Message schema (JSON text frames, protocol version 1):
  server -> client
    {"type": "hello", "proto": 1}
    {"type": "state", "hand", "mode", "margin", "gate", "latency_ms",
     "seq", "trials", "dropped_samples"}          # >= 5 Hz while running
    {"type": "cue", "trial": int, "label": "move"|"rest"}
    {"type": "trial_result", "trial", "cued", "decoded", "correct"}
    {"type": "summary", "accuracy", "tp_rate", "fp_rate", "n_trials",
     "aborted", "report": {...}}
    {"type": "error", "message": str}
  client -> server
    {"type": "set_mode", "mode": "active"|"passive"|"idle"}
    {"type": "start_protocol", "trials": int, "cue_s": s, "rest_s": s}
    {"type": "stop"}

One engine thread consumes the sample source continuously; the protocol
runner borrows that thread. Clients each get a reader thread; outbound
sends are serialized per connection.
"""

import json
import socket
import threading
import time

import numpy as np

from ..errors import Aborted
from . import wsframe
from .protocol import TrialSchedule, run_trial_protocol
from .state import MODE_ACTIVE, MODE_IDLE, MODE_PASSIVE

PROTO_VERSION = 1
STATE_PERIOD_S = 0.1  # 10 Hz telemetry


class SessionService:
    """Serves one decode session over a local WebSocket endpoint."""

    def __init__(self, session, source, host="127.0.0.1", port=0, seed=0):
        self.session = session
        self.source = source
        self.addr = (host, port)
        self.seed = seed
        self._server = None
        self._clients = []           # (socket, send_lock)
        self._clients_lock = threading.Lock()
        self._stop = threading.Event()
        self._abort_protocol = threading.Event()
        self._protocol_request = None
        self._threads = []
        self._last_decision = None
        session.on_decision.append(self._note_decision)

    # --- lifecycle ---

    def start(self):
        self._server = socket.create_server(self.addr)
        self.addr = self._server.getsockname()
        self._spawn(self._accept_loop, name="ws-accept")
        self._spawn(self._engine_loop, name="engine")
        return self.addr

    def stop(self):
        self._stop.set()
        self._abort_protocol.set()
        if self._server is not None:
            try:
                self._server.close()
            except OSError:
                pass
        with self._clients_lock:
            clients = list(self._clients)
        for sock, _ in clients:
            try:
                wsframe.send_close(sock)
                sock.close()
            except OSError:
                pass
        for t in self._threads:
            t.join(timeout=2.0)

    def _spawn(self, fn, name):
        t = threading.Thread(target=fn, name=name, daemon=True)
        t.start()
        self._threads.append(t)
        return t

    # --- outbound ---

    def _broadcast(self, message):
        data = json.dumps(message, sort_keys=True)
        with self._clients_lock:
            clients = list(self._clients)
        for sock, lock in clients:
            try:
                with lock:
                    wsframe.send_text(sock, data)
            except OSError:
                self._drop_client(sock)

    def _drop_client(self, sock):
        with self._clients_lock:
            self._clients = [(s, l) for s, l in self._clients if s is not sock]
        try:
            sock.close()
        except OSError:
            pass

    def _note_decision(self, decision, state):
        self._last_decision = decision

    def _state_message(self):
        snap = self.session.state.snapshot()
        d = self._last_decision
        trace = self.session.state.latency_trace_ms
        return {
            "type": "state",
            "hand": snap["hand"],
            "mode": snap["mode"],
            "margin": 0.0 if d is None else d.margin,
            "gate": None if d is None else d.gate,
            "latency_ms": trace[-1] if trace else None,
            "seq": snap["seq"],
            "trials": snap["trials"],
            "dropped_samples": snap["dropped_samples"],
        }

    # --- engine thread ---

    def _engine_loop(self):
        last_state = 0.0
        while not self._stop.is_set():
            request = self._protocol_request
            if request is not None:
                self._protocol_request = None
                self._run_protocol(request)
                continue
            if self.session.state.mode in (MODE_ACTIVE, MODE_PASSIVE):
                data = self.source.read(self.session.engine.stride)
                if data is None:
                    self.session.state.mode = MODE_IDLE
                    self._broadcast({"type": "error", "message": "source exhausted"})
                else:
                    self.session.process_chunk(data)
            else:
                time.sleep(0.02)
            now = time.monotonic()
            if now - last_state >= STATE_PERIOD_S:
                self._broadcast(self._state_message())
                last_state = now

    def _run_protocol(self, schedule):
        self._abort_protocol.clear()
        rng = np.random.default_rng(self.seed)
        last_state = [0.0]

        def on_decision(decision, state):
            now = time.monotonic()
            if now - last_state[0] >= STATE_PERIOD_S:
                self._broadcast(self._state_message())
                last_state[0] = now

        self.session.on_decision.append(on_decision)
        try:
            ledger, report, rates = run_trial_protocol(
                self.session, self.source, schedule, rng=rng,
                chunk=self.session.engine.stride,
                should_abort=self._abort_protocol.is_set,
                on_cue=lambda i, cued: self._broadcast(
                    {"type": "cue", "trial": i, "label": "move" if cued else "rest"}),
                on_result=lambda rec: self._broadcast(
                    {"type": "trial_result", **rec.to_dict()}),
            )
            summary = {
                "type": "summary", "accuracy": report.accuracy,
                "tp_rate": rates["tp_rate"], "fp_rate": rates["fp_rate"],
                "n_trials": rates["n_trials"], "aborted": False,
                "report": report.to_dict(),
            }
        except Aborted as exc:
            n = len(exc.ledger)
            correct = sum(1 for r in exc.ledger if r["correct"])
            summary = {
                "type": "summary",
                "accuracy": correct / n if n else 0.0,
                "tp_rate": None, "fp_rate": None,
                "n_trials": n, "aborted": True, "report": None,
            }
        finally:
            self.session.on_decision.remove(on_decision)
        self._broadcast(summary)
        self._broadcast(self._state_message())

    # --- inbound ---

    def _accept_loop(self):
        while not self._stop.is_set():
            try:
                sock, _ = self._server.accept()
            except OSError:
                return
            self._spawn(lambda s=sock: self._serve_client(s), name="ws-client")

    def _serve_client(self, sock):
        try:
            rest = wsframe.server_handshake(sock)
        except wsframe.HandshakeError:
            sock.close()
            return
        lock = threading.Lock()
        with self._clients_lock:
            self._clients.append((sock, lock))
        with lock:
            wsframe.send_text(sock, json.dumps({"type": "hello", "proto": PROTO_VERSION}))
            wsframe.send_text(sock, json.dumps(self._state_message(), sort_keys=True))
        reader = wsframe.FrameReader(sock, rest)
        try:
            while not self._stop.is_set():
                text = reader.recv_text()
                if text is None:
                    break
                self._handle_message(text)
        except (ConnectionError, OSError):
            pass
        finally:
            self._drop_client(sock)

    def _handle_message(self, text):
        try:
            msg = json.loads(text)
            kind = msg.get("type")
        except (json.JSONDecodeError, AttributeError):
            self._broadcast({"type": "error", "message": "malformed message"})
            return
        if kind == "set_mode":
            mode = msg.get("mode")
            if mode in (MODE_ACTIVE, MODE_PASSIVE, MODE_IDLE):
                self.session.state.mode = mode
                self._broadcast(self._state_message())
            else:
                self._broadcast({"type": "error", "message": f"unknown mode {mode!r}"})
        elif kind == "start_protocol":
            try:
                schedule = TrialSchedule(
                    n_trials=int(msg.get("trials", 15)),
                    cue_s=float(msg.get("cue_s", 4.0)),
                    rest_s=float(msg.get("rest_s", 3.0)))
            except (TypeError, ValueError):
                self._broadcast({"type": "error", "message": "bad protocol parameters"})
                return
            if schedule.n_trials <= 0:
                self._broadcast({"type": "error", "message": "trials must be positive"})
                return
            self._protocol_request = schedule
        elif kind == "stop":
            self._abort_protocol.set()
        else:
            self._broadcast({"type": "error", "message": f"unknown type {kind!r}"})
