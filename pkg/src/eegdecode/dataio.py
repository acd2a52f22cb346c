"""Persistence: the binary recording interchange format and event CSVs,
plus rest-interval harvesting from the gaps between movement trials.

Recording file layout (little-endian):
  magic "EEG1" | u16 version=1 | u16 n_channels | f32 sample_rate_hz |
  u64 n_samples | per channel: u16 name_len + ASCII name |
  payload: f32 time-major frames (one frame = n_channels values, microvolts)

Events live in a sibling CSV `<stem>.events.csv` with rows
`start_sample,end_sample,label` (label in {rest, move}).

Converters from external archives are expected to emit this format with
the 12-channel montage order of dsp.MONTAGE_12, microvolt units, and any
native sample rate (the pipeline resamples to 250 Hz).
"""

import struct
from pathlib import Path

import numpy as np

from .dsp import Event, Recording, LABEL_NAMES
from .errors import BadEventRow, BadMagic, TruncatedPayload

MAGIC = b"EEG1"
VERSION = 1


def events_path(path):
    p = Path(path)
    return p.with_name(p.stem + ".events.csv")


def write_recording(path, rec):
    """Write a recording (f32 payload) and its sibling event CSV."""
    path = Path(path)
    data32 = np.ascontiguousarray(rec.data.T, dtype="<f4")  # time-major frames
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HHf", VERSION, len(rec.channels), float(rec.sample_rate)))
        f.write(struct.pack("<Q", rec.n_samples))
        for name in rec.channels:
            encoded = name.encode("ascii")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
        f.write(data32.tobytes())
    with open(events_path(path), "w") as f:
        for ev in sorted(rec.events, key=lambda e: e.start):
            f.write(f"{ev.start},{ev.end},{ev.label}\n")
    return path


def _read_exact(f, n, what):
    buf = f.read(n)
    if len(buf) != n:
        raise TruncatedPayload(f"file ends inside {what} ({len(buf)}/{n} bytes)")
    return buf


def read_recording(path):
    """Read a recording written by write_recording; validates the header,
    payload length, and every event row."""
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise BadMagic(f"expected {MAGIC!r}, got {magic!r}")
        version, n_channels, fs = struct.unpack("<HHf", _read_exact(f, 8, "header"))
        if version != VERSION:
            raise BadMagic(f"unsupported version {version}")
        (n_samples,) = struct.unpack("<Q", _read_exact(f, 8, "header"))
        channels = []
        for _ in range(n_channels):
            (name_len,) = struct.unpack("<H", _read_exact(f, 2, "channel table"))
            channels.append(_read_exact(f, name_len, "channel table").decode("ascii"))
        payload = _read_exact(f, n_channels * n_samples * 4, "payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(n_samples, n_channels).T
    events = read_events(events_path(path), n_samples) if events_path(path).exists() else []
    return Recording(channels=tuple(channels), sample_rate=float(fs),
                     data=data.astype(np.float64), events=events)


def read_events(path, n_samples):
    events = []
    with open(path) as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise BadEventRow(line_no, f"expected 3 fields, got {len(parts)}")
            try:
                start, end = int(parts[0]), int(parts[1])
            except ValueError:
                raise BadEventRow(line_no, f"non-integer bounds {parts[:2]}")
            label = parts[2].strip()
            if label not in LABEL_NAMES:
                raise BadEventRow(line_no, f"unknown label {label!r}")
            if start >= end:
                raise BadEventRow(line_no, f"start {start} >= end {end}")
            if start < 0 or end > n_samples:
                raise BadEventRow(line_no, f"[{start}, {end}) outside [0, {n_samples})")
            events.append(Event(start=start, end=end, label=label))
    return events


def extract_rest_epochs(rec, guard_s=1.0):
    """Harvest rest intervals from the gaps between move events.

    Each gap (including before the first and after the last move event)
    is shrunk by guard_s on both sides; intervals shorter than 1 s are
    discarded. Returns (start, end) pairs; they never overlap any move
    event.
    """
    guard = int(round(guard_s * rec.sample_rate))
    min_len = int(round(1.0 * rec.sample_rate))
    moves = sorted((ev for ev in rec.events if ev.label == "move"), key=lambda e: e.start)
    bounds = [0] + [s for ev in moves for s in (ev.start, ev.end)] + [rec.n_samples]
    rests = []
    for gap_start, gap_end in zip(bounds[0::2], bounds[1::2]):
        lo, hi = gap_start + guard, gap_end - guard
        if hi - lo >= min_len:
            rests.append((lo, hi))
    return rests


def add_rest_events(rec, guard_s=1.0):
    """Return a recording whose events include harvested rest intervals
    (no-op when explicit rest events already exist)."""
    if any(ev.label == "rest" for ev in rec.events):
        return rec
    rests = [Event(start=s, end=e, label="rest") for s, e in extract_rest_epochs(rec, guard_s)]
    return Recording(channels=rec.channels, sample_rate=rec.sample_rate,
                     data=rec.data, events=sorted(rec.events + rests, key=lambda e: e.start))
