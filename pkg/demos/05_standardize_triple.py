"""Move a non-standard Siegel set (flag g_P, form Q) onto a standard one.

Run: python demos/05_standardize_triple.py
"""

import numpy as np

from siegelkit.decomp import to_sci
from siegelkit.gensiegel import perturbed, random_triple, standardize, verify_containment

rng = np.random.default_rng(8)
triple = random_triple(3, rng)
print("g_P =", triple.flag.to_text())
print("Q   =", triple.form.to_text())

result = standardize(triple)
print("\nsigma = tau * diag(beta) with")
print("  beta =", [to_sci(b, 8) for b in result.beta])
print("  u' =", to_sci(result.u_prime, 8), "  s =", to_sci(result.s, 8))

report = verify_containment(triple, result, grid=100, seed=1)
print(f"\ncontainment check: {report.checked} grid points, {len(report.failures)} failures")
bad = verify_containment(triple, perturbed(result), grid=100, seed=1)
print(f"with beta perturbed by 10%: {len(bad.failures)} failures (expected > 0)")
