"""Cat map powers driven by a drifting walk with rare large backward jumps.

Each word decorrelates in finitely many steps, but the average decays only like N^-2
because the walk returns to 0 with probability of that order.
"""

import numpy as np

from torusmix import correlations as corr
from torusmix import rates
from torusmix.dynamics import CAT_MAP
from torusmix.observables import TrigPolynomial

law = corr.StepLaw.heavy_negative_tail(0.001, 100_000)
print(f"step law: mean {law.mean():.4f}, support [{law.min_step}, {law.max_step}]")
A, B = TrigPolynomial.character((1, 0)), TrigPolynomial.character((-1, 0))

Ns = [100, 200, 400, 800, 1600]
series = corr.commuting_annealed_series(CAT_MAP, law, A, B, Ns)
for n, v in zip(Ns, series.values):
    print(f"  N={n:5d}  P(W_N = 0) = {v.real:.3e}   N^2 P = {n * n * v.real:.3e}")
print("fit:", rates.classify_decay(series).verdict())

last = []
for w in range(20):
    steps = corr.sample_steps(law, 1600, seed=0, stream=(20, w))
    vals = corr.commuting_quenched_series(CAT_MAP, steps, A, B, range(1601))
    nz = [n for n, v in enumerate(vals) if v != 0]
    last.append(nz[-1] if nz else -1)
print("last N with a nonzero quenched correlation, 20 words:", sorted(last))
print("median walk position after 1600 steps:",
      np.median([corr.sample_steps(law, 1600, seed=0, stream=(20, w)).sum() for w in range(20)]))
