"""GFDM prototype filters and block modulation.

A GFDM block carries K subcarriers times M subsymbols in D = K*M samples.
Every pulse is a time/frequency shift of one prototype filter g, collected
column-wise into the D x D transmitter matrix A. Filters whose frequency
response occupies at most M consecutive (cyclic) DFT bins admit an
FFT-based modulator and, downstream, a per-subcarrier receiver; the
Dirichlet filter is the canonical member of that class.

Conventions: the DFT matrix W_p is unitary ([W_p]_{mn} = exp(-2j*pi*m*n/p)/sqrt(p)),
the frequency-domain filter is g_f = sqrt(D) * W_D @ g (i.e. the plain FFT of g),
and all prototype filters are normalized to unit energy ||g|| = 1 so that every
column of A has unit norm.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, qpsk


@dataclass(frozen=True)
class GfdmConfig:
    """Block dimensions and modulation alphabet for one GFDM configuration.

    K: number of subcarriers, M: subsymbols per subcarrier, D = K*M samples
    per block, L: cyclic-prefix length in samples (defaults to max(1, D // 8)).
    """

    n_subcarriers: int
    n_subsymbols: int
    cp_len: int = 0
    constellation: Constellation = None
    filter_kind: str = "dirichlet"

    def __post_init__(self):
        if self.n_subcarriers < 1 or self.n_subsymbols < 1:
            raise ValueError("subcarrier and subsymbol counts must be positive")
        if self.constellation is None:
            object.__setattr__(self, "constellation", qpsk())
        if self.cp_len == 0:
            object.__setattr__(self, "cp_len", max(1, self.block_len // 8))
        if not 0 < self.cp_len <= self.block_len:
            raise ValueError(
                f"cp_len must lie in (0, {self.block_len}], got {self.cp_len}"
            )

    @property
    def block_len(self) -> int:
        return self.n_subcarriers * self.n_subsymbols


@dataclass(frozen=True)
class PrototypeFilter:
    """Unit-energy prototype pulse in time (g) and frequency (g_f) domain.

    `support`, when present, is the pair (g_1, l): the M nonzero frequency
    bins g_f[(l + i) % D] = g_1[i]. It is set by constructors that build the
    filter from such a window; use :func:`ici_free_support` to recover it
    for arbitrary filters.
    """

    g: np.ndarray
    g_f: np.ndarray
    support: tuple[np.ndarray, int] | None = None

    @property
    def length(self) -> int:
        return len(self.g)


def _filter_from_window(g_1: np.ndarray, shift: int, d_len: int) -> PrototypeFilter:
    m_len = len(g_1)
    g_f = np.zeros(d_len, dtype=complex)
    g_f[(shift + np.arange(m_len)) % d_len] = g_1
    # g_f = fft(g), so Parseval fixes ||g_f|| = sqrt(D) for unit-energy g
    scale = math.sqrt(d_len) / np.linalg.norm(g_f)
    g_f = g_f * scale
    return PrototypeFilter(g=np.fft.ifft(g_f), g_f=g_f, support=(g_1 * scale, shift))


def dirichlet_filter(cfg: GfdmConfig) -> PrototypeFilter:
    """Flat M-bin frequency window: the orthogonal, ICI-free GFDM pulse.

    The window holds sqrt(D/M) on M consecutive bins starting at
    l = (D - ceil(-M/2)) mod D, zero elsewhere; the time-domain pulse is its
    inverse DFT. For M = 1 this is the OFDM rectangular pulse and A equals
    the inverse DFT matrix.
    """
    k, m = cfg.n_subcarriers, cfg.n_subsymbols
    d = k * m
    shift = (d - math.ceil(-m / 2)) % d
    return _filter_from_window(np.ones(m, dtype=complex), shift, d)


def rc_filter(cfg: GfdmConfig, alpha: float) -> PrototypeFilter:
    """Raised-cosine prototype, realized as a frequency-domain amplitude taper.

    The taper is centered on the Dirichlet window of the same (K, M): flat
    over (1 - alpha)*M bins, cosine roll-off out to a total width of
    (1 + alpha)*M bins. For alpha = 0 it degenerates to the Dirichlet
    rectangle; for alpha > 0 (and M > 1) the response spills outside every
    M-bin window, so the filter is not ICI-free. Support is left unset.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"roll-off must lie in [0, 1], got {alpha}")
    k, m = cfg.n_subcarriers, cfg.n_subsymbols
    d = k * m
    shift = (d - math.ceil(-m / 2)) % d
    center = shift + (m - 1) / 2.0
    # signed cyclic bin distance from the window center, in (-D/2, D/2]
    offsets = (np.arange(d) - center + d / 2.0) % d - d / 2.0
    x = np.abs(offsets)
    flat = (1.0 - alpha) * m / 2.0
    edge = (1.0 + alpha) * m / 2.0
    g_f = np.zeros(d)
    g_f[x <= flat] = 1.0
    if alpha > 0.0:
        roll = (x > flat) & (x < edge)
        g_f[roll] = 0.5 * (1.0 + np.cos(np.pi * (x[roll] - flat) / (alpha * m)))
    g_f = g_f.astype(complex) * (math.sqrt(d) / np.linalg.norm(g_f))
    return PrototypeFilter(g=np.fft.ifft(g_f), g_f=g_f, support=None)


def make_filter(cfg: GfdmConfig) -> PrototypeFilter:
    """Build the prototype selected by ``cfg.filter_kind`` ('dirichlet' or 'rc(a)')."""
    kind = cfg.filter_kind.strip().lower()
    if kind == "dirichlet":
        return dirichlet_filter(cfg)
    match = re.fullmatch(r"rc\(([^)]+)\)", kind)
    if match:
        return rc_filter(cfg, float(match.group(1)))
    raise ValueError(f"unknown filter kind '{cfg.filter_kind}'")


def ici_free_support(
    f: PrototypeFilter, n_subsymbols: int, tol: float = 1e-12
) -> tuple[np.ndarray, int] | None:
    """Locate an M-bin cyclic window holding essentially all of ``f.g_f``.

    Returns (g_1, l) where g_1 is the window contents and l its start index,
    or None when no window of M consecutive (cyclic) bins captures at least
    (1 - tol) of the filter's frequency-domain energy. The default tolerance
    is machine-precision level: filters are either in the class by
    construction or not at all.
    """
    g_f = np.asarray(f.g_f)
    d = len(g_f)
    m = n_subsymbols
    if m >= d:
        return g_f.copy(), 0
    energy = np.abs(g_f) ** 2
    total = energy.sum()
    if total == 0.0:
        return None
    windows = np.concatenate([energy, energy[: m - 1]])
    sums = np.convolve(windows, np.ones(m), mode="valid")[:d]
    start = int(np.argmax(sums))  # ties resolve to the smallest start index
    inside = sums[start]
    if inside < (1.0 - tol) * total:
        return None
    outside_peak = math.sqrt(max(total - inside, 0.0))
    if outside_peak > math.sqrt(tol) * math.sqrt(total):
        return None
    idx = (start + np.arange(m)) % d
    return g_f[idx].copy(), start


def build_transmitter_matrix(cfg: GfdmConfig, f: PrototypeFilter) -> np.ndarray:
    """Assemble the dense D x D GFDM matrix A column by column.

    Column m*K + k pulse-shapes subsymbol m of subcarrier k:
    A[n, m*K + k] = g[(n - m*K) % D] * exp(2j*pi*k*n/K).
    """
    k_sc, m_ss = cfg.n_subcarriers, cfg.n_subsymbols
    d = k_sc * m_ss
    if f.length != d:
        raise ValueError(f"filter length {f.length} does not match block length {d}")
    n = np.arange(d)
    cols = np.arange(d)
    m_idx = cols // k_sc
    k_idx = cols % k_sc
    shifts = (n[:, None] - m_idx[None, :] * k_sc) % d
    phase = np.exp(2j * np.pi * k_idx[None, :] * n[:, None] / k_sc)
    return f.g[shifts] * phase


def modulate(d: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Dense modulation A @ d of one block of D data symbols."""
    d = np.asarray(d)
    if d.shape != (a.shape[1],):
        raise ValueError(f"data length {d.shape} does not match matrix {a.shape}")
    return a @ d


def fast_modulate(d: np.ndarray, f: PrototypeFilter, cfg: GfdmConfig) -> np.ndarray:
    """FFT-based modulation for filters with an M-bin frequency window.

    Equivalent to ``modulate(d, A)`` but in O(D log D): one M-point FFT per
    subcarrier, the window scaling, and a single D-point inverse FFT. Data
    ordering matches the dense matrix (index m*K + k holds subsymbol m of
    subcarrier k).
    """
    if f.support is None:
        raise ValueError("fast modulation requires a filter with an M-bin window")
    k_sc, m_ss = cfg.n_subcarriers, cfg.n_subsymbols
    d_len = k_sc * m_ss
    d = np.asarray(d, dtype=complex)
    if d.shape != (d_len,):
        raise ValueError(f"data length {d.shape} does not match block length {d_len}")
    g_1, shift = f.support
    # regroup subsymbol-major data into per-subcarrier rows
    blocks = d.reshape(m_ss, k_sc).T
    spec = np.fft.fft(blocks, axis=1) / math.sqrt(m_ss)
    spec = np.roll(spec, -shift, axis=1) * g_1[None, :] / math.sqrt(k_sc)
    full = np.roll(spec.reshape(d_len), shift)
    return np.fft.ifft(full) * math.sqrt(d_len)
