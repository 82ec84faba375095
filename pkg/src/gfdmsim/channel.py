"""Frequency-selective MIMO channels: generation, application, dense oracles.

Channels are modeled after cyclic-prefix removal, where the dispersive link
between each transmit/receive antenna pair is exactly a circular convolution
with its impulse response. Every antenna pair fades independently (Rayleigh)
with a common power delay profile normalized to unit total power.

All randomness flows through explicitly passed ``numpy.random.Generator``
streams; identical streams reproduce channels and noise bit for bit.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PdpProfile:
    """Per-tap average powers (linear scale), positive and summing to one."""

    powers: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.powers, dtype=float)
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("power delay profile must be a nonempty 1-D array")
        if np.any(p <= 0.0):
            raise ValueError("tap powers must be positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"tap powers must sum to 1, got {p.sum()!r}")
        object.__setattr__(self, "powers", p)

    @property
    def n_taps(self) -> int:
        return len(self.powers)


def exponential_pdp(n_taps: int, span_db: float = 10.0) -> PdpProfile:
    """Exponentially decaying profile, 0 dB at tap 0 down to -span_db at the last tap.

    Powers follow a linear-in-dB ramp and are normalized to unit total power;
    a single tap degenerates to [1.0].
    """
    if n_taps < 1:
        raise ValueError("need at least one tap")
    if n_taps == 1:
        return PdpProfile(np.ones(1))
    ramp = 10.0 ** (-(span_db / (n_taps - 1)) * np.arange(n_taps) / 10.0)
    return PdpProfile(ramp / ramp.sum())


@dataclass(frozen=True)
class MimoChannel:
    """One realization of an R x T channel over blocks of ``block_len`` samples.

    taps[r, t] holds the impulse response of the (receive r, transmit t) pair;
    freq[r, t] its ``block_len``-point DFT (the eigenvalues of the corresponding
    circulant matrix).
    """

    taps: np.ndarray  # (R, T, n_taps) complex
    freq: np.ndarray  # (R, T, block_len) complex

    @property
    def n_rx(self) -> int:
        return self.taps.shape[0]

    @property
    def n_tx(self) -> int:
        return self.taps.shape[1]

    @property
    def block_len(self) -> int:
        return self.freq.shape[2]


def generate_channel(
    n_tx: int,
    n_rx: int,
    pdp: PdpProfile,
    rng: np.random.Generator,
    block_len: int,
) -> MimoChannel:
    """Draw spatially uncorrelated Rayleigh taps shaped by ``pdp``.

    Tap i of every antenna pair is circularly-symmetric complex Gaussian with
    variance pdp.powers[i], so the expected total power per pair is one.
    """
    if pdp.n_taps > block_len:
        raise ValueError("channel memory exceeds the block length")
    shape = (n_rx, n_tx, pdp.n_taps)
    scale = np.sqrt(pdp.powers / 2.0)
    taps = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * scale
    freq = np.fft.fft(taps, n=block_len, axis=2)
    return MimoChannel(taps=taps, freq=freq)


def apply_channel(
    x: np.ndarray,
    ch: MimoChannel,
    noise_power: float,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Pass T transmit blocks through the channel and add complex AWGN.

    x has shape (T, D); the result (R, D) is the sum of per-pair circular
    convolutions plus noise with per-sample variance ``noise_power``
    (equivalent to CP insertion, linear convolution, CP removal).
    """
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    d = ch.block_len
    if x.shape != (ch.n_tx, d):
        raise ValueError(f"expected transmit array of shape {(ch.n_tx, d)}, got {x.shape}")
    xf = np.fft.fft(x, axis=1)
    y = np.fft.ifft(np.einsum("rtd,td->rd", ch.freq, xf), axis=1)
    if noise_power > 0.0:
        if rng is None:
            raise ValueError("a random stream is required when noise_power > 0")
        shape = y.shape
        noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        y = y + noise * np.sqrt(noise_power / 2.0)
    return y


def build_circulant(taps: np.ndarray, d: int) -> np.ndarray:
    """Dense D x D circulant matrix whose first column is the zero-padded taps."""
    taps = np.asarray(taps, dtype=complex)
    if len(taps) > d:
        raise ValueError(f"{len(taps)} taps do not fit a {d}-point block")
    col = np.zeros(d, dtype=complex)
    col[: len(taps)] = taps
    out = np.empty((d, d), dtype=complex)
    for j in range(d):
        out[:, j] = np.roll(col, j)
    return out


def assemble_full_matrix(ch: MimoChannel, a: np.ndarray) -> np.ndarray:
    """Dense RD x TD end-to-end matrix with blocks H_{r,t} @ A (test/diagnostic path)."""
    d = ch.block_len
    if a.shape != (d, d):
        raise ValueError(f"modulation matrix must be {d} x {d}, got {a.shape}")
    out = np.empty((ch.n_rx * d, ch.n_tx * d), dtype=complex)
    for r in range(ch.n_rx):
        for t in range(ch.n_tx):
            h = build_circulant(ch.taps[r, t], d)
            out[r * d : (r + 1) * d, t * d : (t + 1) * d] = h @ a
    return out


def snr_db_to_noise_power(
    snr_db: float, symbol_energy: float = 1.0, cp_penalty: bool = False, cp_len: int = 0, block_len: int = 0
) -> float:
    """Noise power N0 for a target per-antenna SNR = Es/N0.

    Channels have unit average power and the prototype filter unit energy, so
    Es/N0 is the receive-side symbol SNR. CP overhead is excluded unless
    ``cp_penalty`` is set, in which case the transmit energy spent on the
    prefix is charged against the SNR (factor (D + L)/D on N0).
    """
    if np.isinf(snr_db) and snr_db > 0:
        return 0.0
    n0 = symbol_energy * 10.0 ** (-snr_db / 10.0)
    if cp_penalty:
        if cp_len <= 0 or block_len <= 0:
            raise ValueError("cp_penalty requires cp_len and block_len")
        n0 *= (block_len + cp_len) / block_len
    return n0
