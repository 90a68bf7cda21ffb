"""
Mirror transformation for F1 with the bundle O(2 p2)
====================================================

The pre-canonical connection depends on hbar. Birkhoff factorization
removes that dependence, and the mirror map then moves to flat
coordinates (qhat1, qhat2) where the potential collapses to -2*qhat1*qhat2.
"""
from qdm import fixture_path, load_input, run_pipeline
from qdm.render import format_matrix, format_series

space = load_input(fixture_path("f1_super")).superspace()
art = run_pipeline(space, (3, 4))

# %%
# The hbar-dependent entry (1,4) of Omega_1 is 2 h^2 q1 q2/(1 - 4 q2).
print(format_series(art.connection[0].entry(0, 3)))

# %%
# Mirror data: forward map, inverse map, potential and normalization.
md = art.mirror
for a, e in enumerate(md.forward(), 1):
    print(f"q{a}/qhat{a} = {format_series(e)}")
for a, e in enumerate(md.eps, 1):
    print(f"eps{a} = {format_series(e)}")
print("F(q) =", format_series(md.F))
print("F(qhat) =", format_series(md.F_hat))
print("f(q) =", format_series(md.f))

# %%
# Flat connection in qhat; these matrices are the quantum multiplication tables.
for a, om in enumerate(art.flat.omegas, 1):
    print(f"flat Omega_{a}")
    print(format_matrix(om))
