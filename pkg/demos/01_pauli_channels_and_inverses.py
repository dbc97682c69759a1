"""Pauli strings, Pauli channels, and exact channel inversion.

A Pauli channel applies a random Pauli error with some probability per
term.  Its inverse is again diagonal in the Pauli basis but carries negative
quasi-probabilities; the price of sampling it is the overhead
gamma = sum |coefficients|, and estimator variance grows with gamma**2.
"""

from pmit import (
    PauliString,
    depolarizing_channel,
    gamma_dense,
    invert_dense,
    multiply_dense,
    pauli_fidelity,
)

# --- phase-free Pauli algebra ------------------------------------------------

a = PauliString.from_label("XY")
b = PauliString.from_label("YX")
print(f"{a.to_label()} * {b.to_label()} = {(a * b).to_label()}   (phase discarded)")
print(f"XX commutes with ZZ: {a.commutes(b)}")
print(f"boundary reduction of IXXZY: {PauliString.from_label('IXXZY').xi_reduce().to_label()}")
print()

# --- a two-qubit depolarizing channel and its inverse -------------------------

p = 0.02
channel = depolarizing_channel(p, 2)
inverse = invert_dense(channel)
print(f"depolarizing channel, p = {p}:")
print(f"  identity coefficient: {channel.coefficient(PauliString.from_label('II')):.4f}")
print(f"  gamma of the forward channel: {gamma_dense(channel):.6f} (always 1)")
print(f"  gamma of the inverse:         {gamma_dense(inverse):.6f} (> 1)")

# the composition is the identity channel: eigenvalue 1 on every Pauli
composition = multiply_dense(inverse, channel)
worst = max(
    abs(pauli_fidelity(composition, q) - 1.0)
    for q in [PauliString.from_label(s) for s in ("XI", "ZZ", "YX", "IZ")]
)
print(f"  |eigenvalue - 1| of inverse∘channel (sampled Paulis): {worst:.2e}")
print()

# --- negative quasi-probabilities ---------------------------------------------

negatives = [(q.to_label(), c) for q, c in inverse.terms.items() if c < 0]
print(f"inverse carries {len(negatives)} negative coefficients, e.g. "
      f"{negatives[0][0]}: {negatives[0][1]:+.6f}")
print("sampling them costs a sign flip per draw and the gamma prefactor.")
