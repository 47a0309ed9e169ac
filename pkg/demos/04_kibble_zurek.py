"""Adiabatic-impulse picture of the same process.

Close to g_c the gap eps(t) is small and the soft mode cannot follow the drive
adiabatically.  The freeze-out times split each period into adiabatic and
frozen stretches; composing the overlaps gives the probability to leave the
ground state in one period, compared here with the exact Gaussian evolution.
"""
import warnings

import numpy as np

from dicke_dce import SystemParams
from dicke_dce.kz import (KzSchedule, exact_excitation_probability, excitation_probability,
                          freeze_out_times)
from dicke_dce.model import static_gap

warnings.simplefilter("ignore", RuntimeWarning)
base = SystemParams(g=0.49, lam=0.005, eta=2.0)
sched = KzSchedule(base)
times = freeze_out_times(sched)
print("freeze-out phases eta t / pi:", [round(t * base.eta / np.pi, 4) for t in times.times])

eps0 = static_gap(base)
print(f"\neps0 = {eps0:.4f}\n eta/eps0   P(0.005)   P(0.01)    P(0.02)    exact(0.01)")
for r in (5, 8, 12, 20, 30, 40):
    ps = [excitation_probability(base.replace(lam=lam, eta=r * eps0)).probability
          for lam in (0.005, 0.01, 0.02)]
    ex = exact_excitation_probability(base.replace(lam=0.01, eta=r * eps0))
    print(f"{r:8.1f}  " + "  ".join(f"{x:9.2e}" for x in ps) + f"  {ex:9.2e}")
