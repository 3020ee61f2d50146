"""Bias-chain control: mask packing, command frames and bias power.

The controller shifts one bit per column into a daisy chain of 8-bit
shift registers.  Masks are packed MSB first (column 0 is the top bit of
byte 0) and wrapped in a frame::

    A5 | cmd | len | payload ... | xor

where ``xor`` is the XOR of every preceding byte.  The board is assumed
to latch a whole frame at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

SYNC = 0xA5
CMD_SET_PATTERN = 0x01


class FrameError(ValueError):
    pass


def _columns(mask) -> tuple[bool, ...]:
    return tuple(bool(c) for c in getattr(mask, "columns", mask))


def payload_length(n_columns: int) -> int:
    return (n_columns + 7) // 8


def encode_mask(mask) -> bytes:
    """Pack column states MSB first; trailing pad bits are zero."""
    cols = _columns(mask)
    if payload_length(len(cols)) > 0xFF:
        raise ValueError("mask too long for a single frame payload")
    bits = np.zeros(8 * payload_length(len(cols)), dtype=np.uint8)
    bits[:len(cols)] = cols
    return np.packbits(bits).tobytes()


def decode_mask(data: bytes, n_columns: int) -> tuple[bool, ...]:
    if len(data) != payload_length(n_columns):
        raise ValueError(f"{n_columns} columns need {payload_length(n_columns)} bytes, "
                         f"got {len(data)}")
    bits = np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))
    if np.any(bits[n_columns:]):
        raise ValueError("non-zero padding bits")
    return tuple(bool(b) for b in bits[:n_columns])


def xor_checksum(data: bytes) -> int:
    return reduce(lambda a, b: a ^ b, data, 0)


@dataclass(frozen=True)
class CommandFrame:
    command: int
    payload: bytes

    def __post_init__(self):
        if not 0 <= self.command <= 0xFF:
            raise ValueError("command must fit in one byte")
        if len(self.payload) > 0xFF:
            raise ValueError("payload longer than 255 bytes")

    @property
    def header(self) -> bytes:
        return bytes([SYNC, self.command, len(self.payload)])

    @property
    def checksum(self) -> int:
        return xor_checksum(self.header + self.payload)

    def to_bytes(self) -> bytes:
        return self.header + self.payload + bytes([self.checksum])

    def hex(self) -> str:
        return self.to_bytes().hex(" ").upper()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CommandFrame":
        data = bytes(data)
        if len(data) < 4:
            raise FrameError("frame shorter than header + checksum")
        if data[0] != SYNC:
            raise FrameError(f"bad sync byte 0x{data[0]:02X}")
        n = data[2]
        if len(data) != n + 4:
            raise FrameError(f"length byte says {n} payload bytes, frame carries {len(data) - 4}")
        if xor_checksum(data[:-1]) != data[-1]:
            raise FrameError("checksum mismatch")
        return cls(data[1], data[3:-1])


def verify_frame(data: bytes) -> bool:
    try:
        CommandFrame.from_bytes(data)
    except FrameError:
        return False
    return True


def frame_command(mask) -> CommandFrame:
    return CommandFrame(CMD_SET_PATTERN, encode_mask(mask))


def parse_pattern_frame(data: bytes, n_columns: int) -> tuple[bool, ...]:
    frame = CommandFrame.from_bytes(data)
    if frame.command != CMD_SET_PATTERN:
        raise FrameError(f"unexpected command 0x{frame.command:02X}")
    return decode_mask(frame.payload, n_columns)


def send_frame(frame: CommandFrame, device_path) -> int:
    """Write one frame to a character device (e.g. a USB-serial port); returns bytes written."""
    data = frame.to_bytes()
    with open(device_path, "wb", buffering=0) as dev:
        return dev.write(data)


@dataclass(frozen=True)
class BiasChainSpec:
    n_columns: int = 20
    n_series_per_column: int = 20
    i_hold: float = 0.1
    v_supply: float = 40.0
    r_feedback: float = 4.7
    r_on_per_switch: float = 4.0

    def __post_init__(self):
        for name in ("n_columns", "n_series_per_column", "i_hold", "v_supply",
                     "r_feedback", "r_on_per_switch"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def column_resistance(self) -> float:
        return self.n_series_per_column * self.r_on_per_switch + self.r_feedback


def transition_feasible(spec: BiasChainSpec, v_threshold_per_switch: float) -> bool:
    """Whether the rail can push every series switch of a column past threshold."""
    return spec.v_supply >= spec.n_series_per_column * v_threshold_per_switch


@dataclass(frozen=True)
class BiasPower:
    column_dissipation_w: np.ndarray
    column_supply_w: np.ndarray

    @property
    def total_dissipation_w(self) -> float:
        return float(self.column_dissipation_w.sum())

    @property
    def total_supply_w(self) -> float:
        return float(self.column_supply_w.sum())


def bias_power(spec: BiasChainSpec, mask) -> BiasPower:
    """Hold-state power per column.

    An ON column dissipates ``i_hold**2 * (n_series*r_on + r_feedback)`` in
    its chain and draws ``v_supply * i_hold`` from the rail (linear current
    sink); OFF columns draw nothing.
    """
    cols = np.array(_columns(mask), dtype=bool)
    if cols.size != spec.n_columns:
        raise ValueError(f"mask has {cols.size} columns, chain has {spec.n_columns}")
    diss = np.where(cols, spec.i_hold ** 2 * spec.column_resistance, 0.0)
    supply = np.where(cols, spec.v_supply * spec.i_hold, 0.0)
    return BiasPower(diss, supply)
