"""The cat map alone: exact variance growth and a Gaussian limit for Birkhoff sums."""

import numpy as np

from torusmix import limits
from torusmix.dynamics import CAT_MAP, RandomSystem, sample_grid_points, sample_word
from torusmix.observables import TrigPolynomial
from torusmix.streams import stream_rng

system = RandomSystem([CAT_MAP])
A = TrigPolynomial.cosine((1, 0))

D = limits.asymptotic_variance(A, system)
print(f"asymptotic variance {D.value} via {D.method}: the orbit of (1,0) under the transpose never returns")

word = sample_word(system, 512, seed=0)
for n in (16, 64, 256, 512):
    print(f"  V_N / N at N={n}: {limits.quenched_variance(A, word, n) / n}")

rep = limits.quenched_clt_report(A, system, [0], [256, 1024], [0.5, 1.0, 2.0], 20_000, D.value, seed=1)
for n, ks, cd in zip(rep.Ns, rep.ks[0], rep.char_distance[0]):
    print(f"  N={n}: KS to Normal(0, {D.value}) = {ks:.4f}, char-function gap = {cd:.4f}")
long_word = sample_word(system, 1024, seed=0)
sums = limits.birkhoff_samples(A, long_word, [1024], sample_grid_points(stream_rng(0, 9), 5000, 2))[1024]
print(f"sample variance of S_N / sqrt(N) at N=1024: {np.var(sums / 32):.3f} (limit 2)")
