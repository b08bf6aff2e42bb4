"""Heights of reduced degree-N isogeny matrices in the upper half-plane.

Run: python demos/04_gl2_isogenies.py
"""

from siegelkit.gl2 import UpperHalfPoint, hp_experiment, isogeny_matrices, reduce_point

z = UpperHalfPoint.make("7/3", "1/5")
cert = reduce_point(z)
print(f"z = 7/3 + i/5 reduces to {float(cert.point.re):+.4f} + {float(cert.point.im):.4f}i via {cert.delta.to_text()}")

print("Degree-2 matrices in Hermite form:", [m.to_text() for m in isogeny_matrices(2)])

for x in [UpperHalfPoint.make(0, 1), UpperHalfPoint.make("0.3", "4")]:
    records, summary = hp_experiment(x, 150)
    worst = max(records, key=lambda r: r.ratio)
    print(f"x = {float(x.re)} + {float(x.im)}i: {len(records)} matrices, slope of log max H vs log N "
          f"= {summary['slope']:.3f}, max H/N = {float(summary['max_ratio']):.3f} "
          f"(first at N={worst.N}), all reduced points in the domain: {summary['all_in_domain']}")
