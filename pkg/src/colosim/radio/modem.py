"""BPSK packet modem, one sample per symbol.

Frame layout (symbols)::

    preamble (64 PN chips) | length (16 bits, each sent 3x) | payload | CRC-32

The CRC covers the two length bytes and the payload. Bit 0 maps to +1.
Acquisition correlates against the preamble; the preamble also gives a
least-squares estimate of the complex channel gain used to derotate.
"""

import zlib
from dataclasses import dataclass

import numpy as np

from .. import rng

PREAMBLE_LEN = 64
LEN_BITS = 16
HEADER_REPEAT = 3
HEADER_LEN = LEN_BITS * HEADER_REPEAT
CRC_BITS = 32
MAX_PAYLOAD = 2048
DETECT_THRESHOLD = 0.6
SEARCH_CHUNK = 1 << 15  # bounds the correlation work per search
PREAMBLE = rng.pn_chips(0xC0105E, 0, PREAMBLE_LEN).astype(np.complex128)


def frame_len(n_bytes):
    return PREAMBLE_LEN + HEADER_LEN + 8 * n_bytes + CRC_BITS


def _bits(data: bytes):
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def _symbols(bits):
    return 1.0 - 2.0 * bits.astype(np.float64)


def modem_tx(payload: bytes) -> np.ndarray:
    """Baseband symbols of one frame."""
    payload = bytes(payload)
    if not 1 <= len(payload) <= MAX_PAYLOAD:
        raise ValueError(f"payload must be 1..{MAX_PAYLOAD} bytes, got {len(payload)}")
    length = len(payload).to_bytes(2, "big")
    crc = zlib.crc32(length + payload).to_bytes(4, "big")
    header = np.repeat(_bits(length), HEADER_REPEAT)
    body = np.concatenate([header, _bits(payload), _bits(crc)])
    return np.concatenate([PREAMBLE, _symbols(body)]).astype(np.complex128)


@dataclass
class RxFrame:
    start: int  # absolute sample index of the first preamble chip
    end: int
    length: int
    gain: complex
    payload_bits: np.ndarray
    payload: bytes | None  # None when the CRC failed

    @property
    def ok(self):
        return self.payload is not None


def _decide(x):
    return (x < 0).astype(np.uint8)


class ModemRx:
    """Streaming receiver. ``feed`` consecutive sample chunks; get frames back."""

    def __init__(self, t0=0, threshold=DETECT_THRESHOLD):
        self.threshold = threshold
        self._buf = np.zeros(0, dtype=np.complex128)
        self._t0 = t0
        self._locked = False
        self.frames_ok = 0
        self.frames_dropped = 0

    def _search(self):
        buf = self._buf[:SEARCH_CHUNK + PREAMBLE_LEN + 7]
        c = np.abs(np.correlate(buf, PREAMBLE, mode="valid"))
        e = np.concatenate(([0.0], np.cumsum(buf.real ** 2 + buf.imag ** 2)))
        win = e[PREAMBLE_LEN:] - e[:-PREAMBLE_LEN]
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(win > 1e-300, c / np.sqrt(PREAMBLE_LEN * win), 0.0)
        hits = np.flatnonzero(coef >= self.threshold)
        if hits.size == 0:
            return None
        first = int(hits[0])
        # settle on the local peak in case an early partial overlap crossed first
        stop = min(first + 8, len(coef))
        return first + int(np.argmax(coef[first:stop]))

    def _drop(self, n):
        self._buf = self._buf[n:]
        self._t0 += n

    def feed(self, samples):
        self._buf = np.concatenate([self._buf, np.asarray(samples, dtype=np.complex128)])
        out = []
        while True:
            if not self._locked:
                if len(self._buf) < PREAMBLE_LEN:
                    break
                idx = self._search()
                if idx is None:
                    if len(self._buf) > SEARCH_CHUNK + PREAMBLE_LEN + 7:
                        self._drop(SEARCH_CHUNK)
                        continue
                    self._drop(len(self._buf) - (PREAMBLE_LEN - 1))
                    break
                self._drop(idx)
                self._locked = True
            buf = self._buf
            if len(buf) < PREAMBLE_LEN + HEADER_LEN:
                break
            g = np.vdot(PREAMBLE, buf[:PREAMBLE_LEN]) / PREAMBLE_LEN
            if g == 0:
                self._locked = False
                self._drop(1)
                continue
            hdr = (buf[PREAMBLE_LEN:PREAMBLE_LEN + HEADER_LEN] / g).real
            soft = hdr.reshape(LEN_BITS, HEADER_REPEAT).sum(axis=1)
            length = int(np.packbits(_decide(soft)).view(">u2")[0])
            if not 1 <= length <= MAX_PAYLOAD:
                self._locked = False
                self._drop(1)
                continue
            total = frame_len(length)
            if len(buf) < total:
                break
            body = (buf[PREAMBLE_LEN + HEADER_LEN:total] / g).real
            bits = _decide(body)
            payload = np.packbits(bits[:8 * length]).tobytes()
            crc = np.packbits(bits[8 * length:]).tobytes()
            ok = zlib.crc32(length.to_bytes(2, "big") + payload).to_bytes(4, "big") == crc
            frame = RxFrame(self._t0, self._t0 + total, length, complex(g),
                            bits[:8 * length], payload if ok else None)
            out.append(frame)
            self._locked = False
            if ok:
                self.frames_ok += 1
                self._drop(total)
            else:
                self.frames_dropped += 1
                self._drop(PREAMBLE_LEN)
        return out


def modem_rx(stream, t0=0):
    """One-shot decode of a complete sample stream; CRC-passing frames only."""
    return [f for f in ModemRx(t0).feed(stream) if f.ok]
