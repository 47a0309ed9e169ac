"""What frequencies do the emitted photons have?

On resonance (eta = 2 eps0) pairs are created in the soft mode and leave at
omega = eps0.  Off resonance a pair shares the drive quantum differently: one
photon near eps0 and its partner at eta - eps0.  Weaker lines sit at eta + eps0
and at higher sidebands.
"""
import numpy as np
from scipy.signal import find_peaks

from dicke_dce import DampingModel, SystemParams, spectral_density
from dicke_dce.model import static_gap

base = SystemParams(g=0.45, lam=0.005, gamma0=0.005)
damping = DampingModel(base.gamma0)
eps0 = static_gap(base)
omega = np.arange(1, 4001) * base.gamma0 / 10

for ratio in (1.0, 0.7, 1.3):
    p = base.replace(eta=2 * eps0 * ratio)
    w, s = np.array(spectral_density(p, damping, 3, omega)).T
    idx, _ = find_peaks(s)
    idx = idx[np.argsort(s[idx])[::-1][:4]]
    print(f"\neta = {ratio} x 2 eps0 = {p.eta:.4f}   (eps0 = {eps0:.4f})")
    for i in idx:
        print(f"  peak at omega = {w[i]:.4f}   S = {s[i]:.3e}   ({s[i] / s.max():.1e} of max)")
    print(f"  flux = int S = {np.trapezoid(s, w):.3e}")
