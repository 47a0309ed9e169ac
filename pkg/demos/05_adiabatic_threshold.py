"""Below the minimum gap the drive is adiabatic and emission collapses.

eps_min is the smallest soft-mode frequency reached during a period.  Driving
slower than eps_min cannot create soft-mode photons, so the flux drops steeply
there.  The closer g is to g_c, the lower eps_min and the step.
"""
from dicke_dce import DampingModel, SystemParams, output_flux
from dicke_dce.model import gap_minimum, static_gap

damping = DampingModel(0.005)
print(" g/g_c   eps_min   eps0    flux(0.9 eps_min)  flux(1.1 eps_min)  ratio")
for r in (0.9, 0.96, 0.99):
    p = SystemParams(g=0.5 * r, lam=0.005, gamma0=0.005)
    e_min = gap_minimum(p)[0]
    lo = output_flux(p.replace(eta=0.9 * e_min), damping)
    hi = output_flux(p.replace(eta=1.1 * e_min), damping)
    print(f"{r:6.2f}  {e_min:7.4f}  {static_gap(p):6.4f}   {lo:14.3e}   {hi:14.3e}   {hi / lo:6.1f}")
