"""Canonical binary trial-file I/O (magic "EEGT", version 1).

Layout, all little-endian:

    magic       4 bytes  b"EEGT"
    version     u16      1
    n_trials    u32
    n_channels  u32
    n_samples   u32
    fs          f32      Hz
    windows     4 x f32  baseline start/end, activation start/end (s)
    names       per channel: u16 byte length + UTF-8 bytes
    labels      n_trials x u8, each 0 or 1
    payload     n_trials * n_channels * n_samples f32, C order
                (trial-major, then channel, then sample)

Reading then rewriting an unmodified set reproduces the file byte for
byte.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataError
from .signal import TrialSet

__all__ = ["MAGIC", "FORMAT_VERSION", "read_trialfile", "write_trialfile"]

MAGIC = b"EEGT"
FORMAT_VERSION = 1

_HEAD = struct.Struct("<4sHIIIfffff")


def write_trialfile(trials: TrialSet, path) -> None:
    """Serialize a TrialSet; data is stored at f32 precision."""
    names = trials.channel_names or tuple(f"ch{i}" for i in range(trials.n_channels))
    parts = [
        _HEAD.pack(
            MAGIC,
            FORMAT_VERSION,
            trials.n_trials,
            trials.n_channels,
            trials.n_samples,
            trials.fs,
            trials.baseline_window[0],
            trials.baseline_window[1],
            trials.activation_window[0],
            trials.activation_window[1],
        )
    ]
    for name in names:
        raw = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)) + raw)
    parts.append(trials.labels.astype(np.uint8).tobytes())
    parts.append(np.ascontiguousarray(trials.data, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_trialfile(path) -> TrialSet:
    """Read a canonical trial file; raises DataError on any malformation."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEAD.size:
        raise DataError(f"{path}: truncated header")
    magic, version, n_trials, n_channels, n_samples, fs, b0, b1, a0, a1 = _HEAD.unpack_from(blob)
    if magic != MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}, not a trial file")
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {version}")

    offset = _HEAD.size
    names = []
    for _ in range(n_channels):
        if offset + 2 > len(blob):
            raise DataError(f"{path}: truncated channel-name table")
        (length,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        if offset + length > len(blob):
            raise DataError(f"{path}: truncated channel-name table")
        try:
            names.append(blob[offset : offset + length].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise DataError(f"{path}: bad channel name encoding: {exc}") from exc
        offset += length

    if offset + n_trials > len(blob):
        raise DataError(f"{path}: truncated label array")
    labels = np.frombuffer(blob, dtype=np.uint8, count=n_trials, offset=offset)
    offset += n_trials
    if labels.size and labels.max(initial=0) > 1:
        raise DataError(f"{path}: labels outside {{0, 1}}")

    expected = 4 * n_trials * n_channels * n_samples
    if len(blob) - offset != expected:
        raise DataError(
            f"{path}: payload is {len(blob) - offset} bytes, expected {expected}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=offset).reshape(
        n_trials, n_channels, n_samples
    )
    try:
        return TrialSet(
            data=data.astype(np.float64),
            labels=labels.astype(np.int64),
            fs=float(fs),
            baseline_window=(float(b0), float(b1)),
            activation_window=(float(a0), float(a1)),
            channel_names=tuple(names),
        )
    except ValueError as exc:
        raise DataError(f"{path}: inconsistent header: {exc}") from exc
