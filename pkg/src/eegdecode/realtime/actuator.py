"""ASCII line protocol to the hand actuator, plus an in-process
simulated endpoint.

Commands: "OPEN <seq>\\n", "CLOSE <seq>\\n",
"SET <seq> <a1> <a2> <a3> <a4> <a5>\\n" (finger angles, 0..120 degrees).
Replies: "ACK <seq>\\n" or "ERR <seq> <code>\\n".
"""

import time

from ..errors import AngleOutOfRange, MalformedAck

JOINT_RANGE_DEG = 120.0
OPEN, CLOSE, SET = "OPEN", "CLOSE", "SET"


def _fmt_angle(a):
    return f"{a:g}"


def encode_command(cmd, seq, angles=None):
    """Serialize one command to its byte line."""
    if cmd in (OPEN, CLOSE):
        return f"{cmd} {seq}\n".encode("ascii")
    if cmd == SET:
        if angles is None or len(angles) != 5:
            raise ValueError("SET needs exactly 5 finger angles")
        for a in angles:
            if not 0.0 <= float(a) <= JOINT_RANGE_DEG:
                raise AngleOutOfRange(f"angle {a} outside [0, {JOINT_RANGE_DEG:g}]")
        joined = " ".join(_fmt_angle(float(a)) for a in angles)
        return f"SET {seq} {joined}\n".encode("ascii")
    raise ValueError(f"unknown command {cmd!r}")


def parse_ack(line):
    """Parse a reply line; returns (seq, None) for ACK or (seq, code)."""
    if isinstance(line, bytes):
        try:
            line = line.decode("ascii")
        except UnicodeDecodeError as exc:
            raise MalformedAck(f"non-ASCII reply: {line!r}") from exc
    parts = line.strip().split(" ")
    try:
        if parts[0] == "ACK" and len(parts) == 2:
            return int(parts[1]), None
        if parts[0] == "ERR" and len(parts) == 3:
            return int(parts[1]), int(parts[2])
    except ValueError:
        pass
    raise MalformedAck(f"unparseable reply: {line!r}")


class SimulatedHand:
    """In-process actuator endpoint: tracks finger angles, replies ACK
    after a configurable delay, and can be scripted to inject errors."""

    ERR_BAD_LINE = 1
    ERR_BAD_ANGLE = 2

    def __init__(self, ack_delay_s=0.0, fail_seqs=()):
        self.angles = [0.0] * 5          # 0 = fully open
        self.ack_delay_s = ack_delay_s
        self.fail_seqs = set(fail_seqs)
        self.log = []                    # (command, seq) pairs in arrival order

    def exchange(self, line):
        """Submit one command line; returns the reply line (bytes)."""
        if self.ack_delay_s > 0:
            time.sleep(self.ack_delay_s)
        try:
            text = line.decode("ascii") if isinstance(line, bytes) else line
            parts = text.strip().split(" ")
            cmd = parts[0]
            seq = int(parts[1])
        except (IndexError, ValueError, UnicodeDecodeError):
            return b"ERR 0 %d\n" % self.ERR_BAD_LINE
        if seq in self.fail_seqs:
            return f"ERR {seq} {self.ERR_BAD_LINE}\n".encode("ascii")
        if cmd == OPEN and len(parts) == 2:
            self.angles = [0.0] * 5
        elif cmd == CLOSE and len(parts) == 2:
            self.angles = [JOINT_RANGE_DEG] * 5
        elif cmd == SET and len(parts) == 7:
            try:
                angles = [float(a) for a in parts[2:]]
            except ValueError:
                return f"ERR {seq} {self.ERR_BAD_LINE}\n".encode("ascii")
            if any(not 0.0 <= a <= JOINT_RANGE_DEG for a in angles):
                return f"ERR {seq} {self.ERR_BAD_ANGLE}\n".encode("ascii")
            self.angles = angles
        else:
            return f"ERR {seq} {self.ERR_BAD_LINE}\n".encode("ascii")
        self.log.append((cmd, seq))
        return f"ACK {seq}\n".encode("ascii")
