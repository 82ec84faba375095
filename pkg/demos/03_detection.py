"""One noisy block through all three receivers, checked against brute force.

The per-subcarrier receiver factors K small blocks and sphere-decodes each;
the conventional receiver factors the whole RD x TD matrix once and
alternates grouped sphere decoding with interference cancellation. On this
tiny instance the exhaustive search over all 4^8 = 65536 candidate vectors
is feasible and certifies the per-subcarrier result as exactly ML.
"""

import numpy as np

from gfdmsim import (
    DetectionStats,
    GfdmConfig,
    apply_channel,
    assemble_full_matrix,
    build_transmitter_matrix,
    compute_blocks,
    detect_baseline_near_ml,
    detect_proposed,
    dirichlet_filter,
    exhaustive_ml,
    exponential_pdp,
    fast_modulate,
    generate_channel,
    qpsk,
    receive_transform,
)

k_sc, m_ss, n_tx, n_rx = 2, 2, 2, 2
cfg = GfdmConfig(k_sc, m_ss)
cs = qpsk()
rng = np.random.default_rng(7)

filt = dirichlet_filter(cfg)
ch = generate_channel(n_tx, n_rx, exponential_pdp(cfg.cp_len), rng, cfg.block_len)
blocks = compute_blocks(ch, filt, cfg)
h_full = assemble_full_matrix(ch, build_transmitter_matrix(cfg, filt))

data = cs.points[rng.integers(0, cs.size, n_tx * cfg.block_len)]
x = np.stack([fast_modulate(data[t * 4 : (t + 1) * 4], filt, cfg) for t in range(n_tx)])
noise_power = 10.0 ** (-8.0 / 10.0)  # 8 dB
y = apply_channel(x, ch, noise_power, rng)

stats = DetectionStats()
d_fast = detect_proposed(receive_transform(y, blocks.shift, k_sc, m_ss), blocks, cs, stats=stats)
d_base = detect_baseline_near_ml(y.reshape(-1), h_full, cs, noise_power, group_size=m_ss * n_tx)
d_ml = exhaustive_ml(y.reshape(-1), h_full, cs)

print("sent:                ", np.round(data, 3))
print("per-subcarrier ML:   ", np.round(d_fast, 3))
print("grouped SIC baseline:", np.round(d_base, 3))
print()
print("per-subcarrier == exhaustive ML:", np.array_equal(d_fast, d_ml))
print(f"symbol errors: per-subcarrier {np.sum(d_fast != data)}, baseline {np.sum(d_base != data)}")
print(f"sphere decoder visited {stats.sd_nodes_visited} nodes "
      f"({stats.cm_count} complex multiplications) vs 65536 exhaustive candidates")
