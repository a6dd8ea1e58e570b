"""Uncertainty bounds on the canonical configuration, and where the energy identity stands.

Run:  python demos/03_uncertainty_and_energy.py
"""
from qstockwell import stockwell as sw
from qstockwell import uncertainty as un
from qstockwell.analytic import Gaussian
from qstockwell.grid import canonical_axis, lp_norm, sample_analytic

ax = canonical_axis()
axes = (ax, ax)
f = sample_analytic(Gaussian(), axes)
phi = sw.make_window("admissible_dog", axes=axes, alpha=0.5, beta=2.0)

adm = sw.admissibility_constant(phi)
print(f"C_phi = {adm.c_phi:.5f} ({adm.verdict}; estimates {', '.join(f'{e:.4f}' for e in adm.estimates)})")

S = sw.forward_fast(f, phi, sw.canonical_xi_axes(), axes)
nf, nphi = lp_norm(f, 2), phi.norm

reports = [
    un.beckner_check(S, nf, nphi),
    un.heisenberg_check(S, 2, 2, nf, nphi),
    un.local_check(S, un.central_box(S, 1.0), 1.0, 2.0, nf, nphi),
    un.donoho_stark_check(S, un.energy_box(S, 0.91), adm.c_phi, nphi),
    un.lieb_concentration_check(S, un.energy_box(S, 0.91), 4.0, adm.c_phi, nphi),
]
for r in reports:
    print(f"{r.name:38s} {r.lhs:12.5g} {r.direction} {r.rhs:<12.5g} {'holds' if r.satisfied else 'VIOLATED'}")

# The energy identity needs the whole (xi, b) plane.  On the 16x16 xi-grid
# over [-4, 4] with b limited to [-8, 8) a quarter of the energy is missing,
# and refining xi alone does not bring it back.
for n in (16, 32):
    ratio = sw.plancherel_ratio(sw.forward_fast(f, phi, sw.canonical_xi_axes(4.0, n), axes), adm.c_phi, f)
    print(f"energy ratio, {n}x{n} xi-grid on [-4, 4], b on the signal grid: {ratio:.4f}")

# A wider signal, translations past the window tails and frequencies out to 8
# recover it; this takes about half a minute.
from qstockwell.analytic import ModulatedGaussian
from qstockwell.grid import Axis, offset_axis

big = Axis(96, -12.0, 0.25)
g = sample_analytic(ModulatedGaussian(2.0, 2.0, omega=(1.5, 1.5)), (big, big))
wide_b = Axis(128, -16.0, 0.25)
for n in (16, 32):
    xi = offset_axis(8.0, n)
    energy = sw.streamed_energy(g, phi, (xi, xi), (wide_b, wide_b), rows_per_block=4)
    print(f"extended grids, {n}x{n} xi on [-8, 8]: ratio {energy / (adm.c_phi * lp_norm(g, 2) ** 2):.4f}")
