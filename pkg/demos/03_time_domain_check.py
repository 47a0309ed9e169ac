"""Cross-check: integrate the open-system dynamics directly.

The Hamiltonian is quadratic, so second moments evolve in closed form.
Starting from the bare vacuum and waiting for the periodic steady state gives
<a^dag a> independently of the sideband (frequency-domain) solver.
"""
from dicke_dce import DampingModel, SystemParams, intracavity_photons
from dicke_dce.model import static_gap
from dicke_dce.oracle import cycle_averaged_photons, evolve, ground_state_photons

base = SystemParams(g=0.45, lam=0.005, gamma0=0.005)
damping = DampingModel(base.gamma0)
eps0 = static_gap(base)

print(f"virtual photons in the static ground state: {ground_state_photons(base):.6f}")
for ratio in (1.0, 0.7, 1.3):
    p = base.replace(eta=2 * eps0 * ratio)
    n_fd = intracavity_photons(p, damping)
    n_td, rate = cycle_averaged_photons(p, damping)
    print(f"eta/2eps0 = {ratio}: sideband {n_fd:.6f}, time domain {n_td:.6f}, "
          f"emission rate {rate:.3e}")

# how the steady state is approached (averages over one drive period; within a
# period <a^dag a> oscillates strongly because the soft mode is squeezed)
p = base.replace(eta=2 * eps0)
spp = 32
traj = evolve(p, damping, 400 * p.period, samples_per_period=spp)
for k in (1, 25, 50, 100, 200, 400):
    avg = traj.photons[(k - 1) * spp:k * spp].mean()
    print(f"  period {k:4d} (t = {k * p.period:7.1f})  <a^dag a> = {avg:.5f}")
