"""Scale functions, the bound function rho_t and its explicit integral bounds.

    python demos/bound_function.py
"""

import numpy as np

from levyheat import measure, verify

for family in ("stable", "log"):
    for d in (1, 2):
        p = measure.make_profile(family, 1.0, d)
        lo, hi = measure.OMEGA[d] / 2, measure.OMEGA[d] / 2 * (1 + 2 / d)
        vals = [verify.bound_function_integral(p, t)[0] for t in (0.1, 1.0, 10.0)]
        print(f"{family:7s} d={d}  ∫rho_t at t=0.1,1,10: " + ", ".join(f"{v:.4f}" for v in vals)
              + f"   interval [{lo:.4f}, {hi:.4f}]")

p = measure.log_profile(1.0)
cert = measure.estimate_scaling(p)
print(f"\nslowly varying profile: alpha_h = {cert.alpha_h}, C_h = {cert.C_h:.3f}, theta_h = {cert.theta_h:g}")
r = np.logspace(-3, 3, 7)
for ri, h, K in zip(r, measure.h_of(p, r), measure.K_of(p, r)):
    print(f"  r = {ri:8.3g}   h = {h:10.4g}   K = {K:10.4g}")

for check in verify.check_appendix_inequalities(measure.stable(1.0), convolutions=False):
    print(f"{check.name:28s} constant {check.constant}  residual {check.residual:g}")
