"""
Quantum products of the first Hirzebruch surface
================================================

Runs the full pipeline on F1 with no bundle and prints the connection
matrices and the small quantum product table. The connection is already
hbar-free here, so the Birkhoff factor S_plus is the identity.
"""
from qdm import fixture_path, load_input, run_pipeline, verify_suite
from qdm.render import format_matrix, format_series

space = load_input(fixture_path("f1")).superspace()
art = run_pipeline(space, (3, 3))
names = [art.ring.monomial_name(i) for i in range(art.ring.dim)]
print("basis:", ", ".join(names))

# %%
# Connection matrices, entry (i,j) is the T_i coefficient of Omega_a(T_j).
for a, om in enumerate(art.connection.omegas, 1):
    print(f"Omega_{a}")
    print(format_matrix(om))

# %%
# Quantum multiplication by p1.
for j, name in enumerate(names):
    terms = [f"({format_series(s)})*{names[k]}" for k, s in art.table.product(1, j)]
    print(f"p1 * {name} = {' + '.join(terms) or '0'}")

# %%
# Invariant checks over every stage.
print("\n".join(verify_suite(art).lines()))
