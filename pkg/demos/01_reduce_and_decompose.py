"""Decompose a matrix, then push a random one into the fundamental Siegel set.

Run: python demos/01_reduce_and_decompose.py
"""

import numpy as np

from siegelkit.decomp import iwasawa, matmul, real_matrix, to_sci
from siegelkit.siegel import SiegelParams, in_siegel, reduce_to_siegel

P = 128
params = SiegelParams.fundamental()

print("g = [[2, 1], [0, 1]] splits as nu * diag(alpha) * kappa:")
dec = iwasawa(real_matrix([[2, 1], [0, 1]], P), P)
print("  nu_12 =", to_sci(dec.nu[0, 1], 6), " alpha =", [to_sci(a, 6) for a in dec.alpha])
print("  |nu_12| = 1 exceeds u = 1/2, so g is outside the Siegel set:",
      not in_siegel(real_matrix([[2, 1], [0, 1]], P), params, 1e-12, P)[0])

rng = np.random.default_rng(1)
g = real_matrix(rng.uniform(-10, 10, (4, 4)).tolist(), P)
trace = []
delta, dec = reduce_to_siegel(g, params, precision=P, trace=trace)
print("\nA random 4x4 matrix is reduced by the unimodular")
for row in delta.rows:
    print("   ", " ".join(f"{int(x):>4}" for x in row))
print("log-potential at each iteration:", [f"{float(v):.3f}" for v in trace])
ratios = [float(dec.alpha[j] / dec.alpha[j + 1]) for j in range(3)]
print("alpha ratios of delta*g:", [f"{r:.3f}" for r in ratios], "(all >= sqrt(3)/2 = 0.866)")
print("certified member:", in_siegel(matmul(real_matrix(delta.rows, P), g, P), params, 1e-12, P)[0])
