"""Seeded Monte Carlo SER/complexity sweeps, closed-form operation counts, CSV reports.

A sweep is a pure function of its configuration: every random draw comes
from a counter-derived substream of the master seed, keyed by
(seed, purpose, snr index, channel index, block index). Channel and noise
draws do not depend on the detection scheme, so sweeps with different
schemes but the same seed see identical channels, data, and noise and can
be compared pairwise.

Complexity accounting follows the split used throughout: QR-factorization
and interference-cancellation counts come from closed-form complex-
multiplication formulas (evaluated in exact integer arithmetic), while
sphere-decoder work is measured during the run. Reports are per block, with
the factorization charged once per channel realization and amortized over
its blocks.
"""

import re
import time
from dataclasses import dataclass

import numpy as np

from . import channel as chan
from . import detect
from . import waveform
from .constellation import by_name as constellation_by_name
from .decoupling import compute_blocks, receive_transform

SCHEMES = ("baseline_dirichlet", "baseline_rc", "ofdm", "proposed_dirichlet")
DEFAULT_RC_ROLLOFF = 0.9

# substream tags for the counter-based seed derivation
_STREAM_CHANNEL = 0
_STREAM_DATA = 1
_STREAM_NOISE = 2

CONFIG_KEYS = (
    "scheme",
    "K",
    "M",
    "T",
    "R",
    "L",
    "constellation",
    "snr_db",
    "n_channels",
    "n_blocks",
    "seed",
    "out",
)


class ConfigError(ValueError):
    """Raised for unknown keys, bad values, or violated constraints."""


def parse_scheme(text: str) -> tuple[str, float | None]:
    """Split a scheme spec like 'baseline_rc(0.9)' into (name, roll-off).

    Schemes without a roll-off return None; a bare 'baseline_rc' gets the
    default roll-off of 0.9.
    """
    text = text.strip()
    match = re.fullmatch(r"baseline_rc\(([^)]+)\)", text)
    if match:
        try:
            alpha = float(match.group(1))
        except ValueError:
            raise ConfigError(f"invalid roll-off in scheme '{text}'") from None
        if not 0.0 <= alpha <= 1.0:
            raise ConfigError(f"roll-off must lie in [0, 1], got {alpha}")
        return "baseline_rc", alpha
    if text == "baseline_rc":
        return "baseline_rc", DEFAULT_RC_ROLLOFF
    if text in SCHEMES:
        return text, None
    raise ConfigError(f"unknown scheme '{text}' (expected one of {', '.join(SCHEMES)})")


@dataclass(frozen=True)
class SimConfig:
    """Everything a sweep depends on; two equal configs produce identical output."""

    scheme: str
    n_subcarriers: int
    n_subsymbols: int
    n_tx: int
    n_rx: int
    cp_len: int
    snr_db: tuple[float, ...]
    n_channels: int
    n_blocks: int
    alpha: float | None = None
    constellation: str = "qpsk"
    seed: int = 0
    out: str | None = None

    @property
    def block_len(self) -> int:
        return self.n_subcarriers * self.n_subsymbols

    def filter_label(self) -> str:
        if self.scheme == "baseline_rc":
            return f"rc({self.alpha:g})"
        return "dirichlet"

    def scheme_spec(self) -> str:
        if self.scheme == "baseline_rc":
            return f"baseline_rc({self.alpha!r})"
        return self.scheme

    def validate(self, n_channel_taps: int | None = None) -> None:
        """Check the cross-field constraints; raises ConfigError on violation."""
        for label, value in (
            ("K", self.n_subcarriers),
            ("M", self.n_subsymbols),
            ("T", self.n_tx),
            ("R", self.n_rx),
            ("L", self.cp_len),
            ("n_channels", self.n_channels),
            ("n_blocks", self.n_blocks),
        ):
            if value < 1:
                raise ConfigError(f"{label} must be positive, got {value}")
        if self.cp_len > self.block_len:
            raise ConfigError(
                f"L = {self.cp_len} exceeds the block length D = {self.block_len}"
            )
        taps = self.cp_len if n_channel_taps is None else n_channel_taps
        if self.cp_len < taps:
            raise ConfigError(
                f"L = {self.cp_len} does not cover the channel memory of {taps} taps"
            )
        if len(self.snr_db) == 0:
            raise ConfigError("snr_db must list at least one point")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme '{self.scheme}'")
        if self.scheme == "ofdm" and self.n_subsymbols != 1:
            raise ConfigError("scheme 'ofdm' requires M = 1")
        if self.scheme == "baseline_rc" and self.alpha is None:
            raise ConfigError("scheme 'baseline_rc' requires a roll-off")
        constellation_by_name(self.constellation)


def _parse_snr_list(text: str) -> tuple[float, ...]:
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    parts = [p.strip() for p in body.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty SNR list")
    return tuple(float(p) for p in parts)


_INT_KEYS = {"K", "M", "T", "R", "L", "n_channels", "n_blocks", "seed"}
_REQUIRED_KEYS = {"scheme", "K", "M", "T", "R", "snr_db", "n_channels", "n_blocks"}


def _typed(key: str, text: str, where: str):
    try:
        if key in _INT_KEYS:
            return int(text)
        if key == "snr_db":
            return _parse_snr_list(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"{where}: invalid value for {key}: {text!r} ({exc})") from None


def parse_config(
    path: str | None = None, overrides: dict[str, str] | None = None
) -> SimConfig:
    """Read a key-value config file, apply flag overrides, and validate.

    The format is one ``key = value`` pair per line; '#' starts a comment.
    Allowed keys: scheme, K, M, T, R, L, constellation, snr_db, n_channels,
    n_blocks, seed, out. Defaults: L = max(1, D // 8), constellation = qpsk,
    seed = 0. Error messages carry the offending file line or flag.
    """
    values: dict[str, object] = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                where = f"{path}:{lineno}"
                if "=" not in line:
                    raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
                key, _, text = line.partition("=")
                key = key.strip()
                if key not in CONFIG_KEYS:
                    raise ConfigError(f"{where}: unknown key '{key}'")
                if key in values:
                    raise ConfigError(f"{where}: duplicate key '{key}'")
                values[key] = _typed(key, text.strip(), where)
    for key, text in (overrides or {}).items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"flag --{key}: unknown key '{key}'")
        values[key] = _typed(key, str(text), f"flag --{key}")
    missing = sorted(_REQUIRED_KEYS - values.keys())
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")
    scheme, alpha = parse_scheme(str(values["scheme"]))
    d = int(values["K"]) * int(values["M"])
    cfg = SimConfig(
        scheme=scheme,
        alpha=alpha,
        n_subcarriers=int(values["K"]),
        n_subsymbols=int(values["M"]),
        n_tx=int(values["T"]),
        n_rx=int(values["R"]),
        cp_len=int(values.get("L", max(1, d // 8))),
        constellation=str(values.get("constellation", "qpsk")),
        snr_db=tuple(values["snr_db"]),
        n_channels=int(values["n_channels"]),
        n_blocks=int(values["n_blocks"]),
        seed=int(values.get("seed", 0)),
        out=values.get("out"),
    )
    cfg.validate()
    return cfg


def serialize_config(cfg: SimConfig) -> str:
    """Config text that parses back to an identical SimConfig."""
    lines = [
        f"scheme = {cfg.scheme_spec()}",
        f"K = {cfg.n_subcarriers}",
        f"M = {cfg.n_subsymbols}",
        f"T = {cfg.n_tx}",
        f"R = {cfg.n_rx}",
        f"L = {cfg.cp_len}",
        f"constellation = {cfg.constellation}",
        f"snr_db = {', '.join(repr(s) for s in cfg.snr_db)}",
        f"n_channels = {cfg.n_channels}",
        f"n_blocks = {cfg.n_blocks}",
        f"seed = {cfg.seed}",
    ]
    if cfg.out is not None:
        lines.append(f"out = {cfg.out}")
    return "\n".join(lines) + "\n"


def closed_form_cm(scheme: str, k: int, m: int, t: int, r: int) -> tuple[int, int]:
    """Closed-form complex-multiplication counts (QR factorization, SIC).

    Evaluated in exact integer arithmetic for the detection of K*M*T symbols:

    * ofdm:     D T^2 R + D T R + (D T^2 - D T) / 2 with D = K*M; no SIC.
    * baseline: K^3 M^3 T^2 R + K^2 M^2 T R
                + (2 K^3 M^3 T^3 + 3 K^2 M^2 T^2 + K M T) / 6;
                SIC costs K^2 M^2 T^2.
    * proposed: K M^3 T^2 R + K M^2 T R + (K M^2 T^2 - K M T) / 2; no SIC.
    """
    if min(k, m, t, r) < 1:
        raise ValueError("dimensions must be positive")
    if scheme in ("proposed", "baseline"):
        name = scheme
    else:
        name, _ = parse_scheme(scheme)
    if name == "ofdm":
        d = k * m
        return d * t * t * r + d * t * r + (d * t * t - d * t) // 2, 0
    if name in ("baseline", "baseline_dirichlet", "baseline_rc"):
        n = k * m * t
        sqrd_cm = k**3 * m**3 * t * t * r + k * k * m * m * t * r + n * (n + 1) * (2 * n + 1) // 6
        return sqrd_cm, k * k * m * m * t * t
    if name in ("proposed", "proposed_dirichlet"):
        return (
            k * m**3 * t * t * r + k * m * m * t * r + (k * m * m * t * t - k * m * t) // 2,
            0,
        )
    raise ValueError(f"unknown scheme '{scheme}'")


@dataclass(frozen=True)
class TrialRecord:
    """Aggregated outcome of one (SNR point, scheme) cell of a sweep."""

    snr_db: float
    scheme: str
    filter_label: str
    n_subcarriers: int
    n_subsymbols: int
    n_tx: int
    n_rx: int
    errors: int
    symbols: int
    cm_sqrd: int
    cm_sic: int
    cm_sd: int
    sd_nodes: int
    n_channels: int
    n_blocks: int
    wall_time: float

    @property
    def ser(self) -> float:
        return self.errors / self.symbols

    @property
    def cm_sd_avg(self) -> float:
        return self.cm_sd / (self.n_channels * self.n_blocks)

    @property
    def sd_nodes_avg(self) -> float:
        return self.sd_nodes / (self.n_channels * self.n_blocks)

    @property
    def total_cm_avg(self) -> float:
        # per-block total: factorization once per channel realization,
        # amortized over its blocks; SIC and sphere decoding per block
        return self.cm_sqrd / self.n_blocks + self.cm_sic + self.cm_sd_avg


def _trial_rng(seed: int, stream: int, *counters: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream, *counters]))


def run_sweep(cfg: SimConfig) -> list[TrialRecord]:
    """Run the configured Monte Carlo sweep and return one record per SNR point.

    Per SNR point: n_channels independent Rayleigh realizations, n_blocks
    uniformly drawn data blocks each, detection with the configured scheme,
    symbol-error and sphere-decoder counters accumulated. Output is a pure
    function of cfg.
    """
    cfg.validate()
    cs = constellation_by_name(cfg.constellation)
    k_sc, m_ss = cfg.n_subcarriers, cfg.n_subsymbols
    n_tx, n_rx, d = cfg.n_tx, cfg.n_rx, cfg.block_len
    gcfg = waveform.GfdmConfig(
        n_subcarriers=k_sc, n_subsymbols=m_ss, cp_len=cfg.cp_len, constellation=cs
    )
    if cfg.scheme == "baseline_rc":
        filt = waveform.rc_filter(gcfg, cfg.alpha)
    else:
        filt = waveform.dirichlet_filter(gcfg)
    pdp = chan.exponential_pdp(cfg.cp_len)
    needs_dense = cfg.scheme in ("baseline_dirichlet", "baseline_rc")
    a_mat = waveform.build_transmitter_matrix(gcfg, filt) if needs_dense else None
    cm_sqrd, cm_sic = closed_form_cm(cfg.scheme, k_sc, m_ss, n_tx, cfg.n_rx)
    records = []
    for s_idx, snr in enumerate(cfg.snr_db):
        noise_power = chan.snr_db_to_noise_power(snr, cs.energy)
        stats = detect.DetectionStats(cm_sqrd=cm_sqrd, cm_sic=cm_sic)
        errors = 0
        symbols = 0
        start = time.perf_counter()
        for c_idx in range(cfg.n_channels):
            rng_ch = _trial_rng(cfg.seed, _STREAM_CHANNEL, s_idx, c_idx)
            ch = chan.generate_channel(n_tx, n_rx, pdp, rng_ch, d)
            if cfg.scheme == "proposed_dirichlet":
                blocks = compute_blocks(ch, filt, gcfg)
                factors = detect.factorize_blocks(blocks)
            elif cfg.scheme == "ofdm":
                factors = [detect.sqrd(ch.freq[:, :, i]) for i in range(d)]
            else:
                h_full = chan.assemble_full_matrix(ch, a_mat)
                factor = detect.baseline_factorization(h_full, noise_power, cs.energy)
            for b_idx in range(cfg.n_blocks):
                rng_d = _trial_rng(cfg.seed, _STREAM_DATA, s_idx, c_idx, b_idx)
                data = cs.points[rng_d.integers(0, cs.size, size=n_tx * d)]
                if filt.support is not None:
                    x = np.stack(
                        [
                            waveform.fast_modulate(data[t * d : (t + 1) * d], filt, gcfg)
                            for t in range(n_tx)
                        ]
                    )
                else:
                    x = np.stack(
                        [a_mat @ data[t * d : (t + 1) * d] for t in range(n_tx)]
                    )
                rng_n = _trial_rng(cfg.seed, _STREAM_NOISE, s_idx, c_idx, b_idx)
                y = chan.apply_channel(x, ch, noise_power, rng_n)
                if cfg.scheme == "proposed_dirichlet":
                    ybar = receive_transform(y, blocks.shift, k_sc, m_ss)
                    d_hat = detect.detect_proposed(
                        ybar, blocks, cs, noise_power, stats=stats, factors=factors
                    )
                elif cfg.scheme == "ofdm":
                    d_hat = detect.detect_ofdm(y, ch, cs, stats=stats, factors=factors)
                else:
                    d_hat = detect.detect_baseline_near_ml(
                        y.reshape(-1),
                        h_full,
                        cs,
                        noise_power,
                        group_size=m_ss * n_tx,
                        stats=stats,
                        factor=factor,
                    )
                errors += int(np.sum(d_hat != data))
                symbols += n_tx * d
        records.append(
            TrialRecord(
                snr_db=float(snr),
                scheme=cfg.scheme,
                filter_label=cfg.filter_label(),
                n_subcarriers=k_sc,
                n_subsymbols=m_ss,
                n_tx=n_tx,
                n_rx=n_rx,
                errors=errors,
                symbols=symbols,
                cm_sqrd=cm_sqrd,
                cm_sic=cm_sic,
                cm_sd=stats.cm_count,
                sd_nodes=stats.sd_nodes_visited,
                n_channels=cfg.n_channels,
                n_blocks=cfg.n_blocks,
                wall_time=time.perf_counter() - start,
            )
        )
    return records


CSV_HEADER = (
    "snr_db,scheme,filter,K,M,T,R,ser,errors,symbols,"
    "cm_sqrd,cm_sic,cm_sd_avg,sd_nodes_avg,total_cm_avg"
)


def _g6(value: float) -> str:
    return format(value, ".6g")


def write_report(records: list[TrialRecord], path: str) -> None:
    """Write one CSV row per (SNR, scheme), sorted by SNR then scheme name.

    Floating-point columns use 6 significant digits; identical record lists
    produce byte-identical files. Raises on an empty record list without
    creating the file.
    """
    if not records:
        raise ValueError("no records to write")
    rows = sorted(records, key=lambda rec: (rec.snr_db, rec.scheme))
    lines = [CSV_HEADER]
    for rec in rows:
        lines.append(
            ",".join(
                [
                    _g6(rec.snr_db),
                    rec.scheme,
                    rec.filter_label,
                    str(rec.n_subcarriers),
                    str(rec.n_subsymbols),
                    str(rec.n_tx),
                    str(rec.n_rx),
                    _g6(rec.ser),
                    str(rec.errors),
                    str(rec.symbols),
                    str(rec.cm_sqrd),
                    str(rec.cm_sic),
                    _g6(rec.cm_sd_avg),
                    _g6(rec.sd_nodes_avg),
                    _g6(rec.total_cm_avg),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
