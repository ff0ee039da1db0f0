"""How quenched mixing rates turn into annealed and weaker-norm rates."""

import numpy as np

from torusmix import rates

alpha = 1.0
for kappa in (0.5, 1.0, 2.0, 8.0):
    rate, beta = rates.annealed_rate_from_quenched(alpha, kappa)
    grid = np.linspace(0, alpha, 10_001)
    good, bad = rates.annealed_transfer_exponents(alpha, kappa, grid)
    print(f"kappa={kappa:4.1f}: annealed rate {rate:.4f} at beta={beta:.4f}; "
          f"grid optimum beta={grid[np.argmax(np.minimum(good, bad))]:.4f}")

s0 = 2.0
for s in (0.5, 1.0, 1.5, 2.0):
    print(f"s={s}: rate in the order-s norm from rate {alpha} in order {s0}: {rates.interpolated_rate(alpha, s0, s):.4f}")
