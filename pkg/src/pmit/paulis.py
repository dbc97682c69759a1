"""Phase-free n-qubit Pauli strings in symplectic bit representation.

A Pauli string is stored as two bit masks ``x`` and ``z`` (Python integers,
so any qubit count is supported without truncation).  Bit ``q`` of ``x``/``z``
belongs to qubit ``q``; the per-qubit letter decodes as

    (x=0, z=0) -> I      (x=1, z=0) -> X
    (x=1, z=1) -> Y      (x=0, z=1) -> Z

No phase is tracked: these objects describe Pauli *channels* (conjugations
``rho -> P rho P``), for which global phases cancel.  Products therefore
reduce to XOR of the bit masks, and every string is its own inverse.

Text form: one uppercase letter per qubit, leftmost letter = qubit 0
(e.g. ``"IXXZY"``).
"""

from __future__ import annotations

from typing import Iterator

_LETTERS = "IXYZ"
# letter code (used by lexicographic ordering): I=0, X=1, Y=2, Z=3
_CODE_FROM_BITS = (0, 3, 1, 2)  # index = 2*x + z
_BITS_FROM_CODE = ((0, 0), (1, 0), (1, 1), (0, 1))  # code -> (x, z)


class PauliError(ValueError):
    """Invalid Pauli construction or mismatched operand dimensions."""


def _check_same_size(a: "PauliString", b: "PauliString") -> None:
    if a.n_qubits != b.n_qubits:
        raise PauliError(
            f"operand size mismatch: {a.n_qubits} vs {b.n_qubits} qubits"
        )


class PauliString:
    """Immutable phase-free Pauli string on ``n_qubits`` qubits."""

    __slots__ = ("n_qubits", "x", "z", "_hash")

    def __init__(self, n_qubits: int, x: int = 0, z: int = 0):
        if n_qubits <= 0:
            raise PauliError("n_qubits must be positive")
        mask = (1 << n_qubits) - 1
        if x & ~mask or z & ~mask:
            raise PauliError("bit mask exceeds n_qubits")
        object.__setattr__(self, "n_qubits", n_qubits)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "_hash", hash((n_qubits, x, z)))

    def __setattr__(self, *args):
        raise AttributeError("PauliString is immutable")

    # -- construction ----------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"IXYZ..."``; leftmost character is qubit 0."""
        if not label:
            raise PauliError("empty Pauli label")
        x = z = 0
        for q, ch in enumerate(label):
            if ch == "I":
                pass
            elif ch == "X":
                x |= 1 << q
            elif ch == "Y":
                x |= 1 << q
                z |= 1 << q
            elif ch == "Z":
                z |= 1 << q
            else:
                raise PauliError(f"invalid Pauli letter {ch!r} in {label!r}")
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliString":
        """Single non-identity letter on one qubit, identity elsewhere."""
        if not 0 <= qubit < n_qubits:
            raise PauliError(f"qubit {qubit} out of range for n={n_qubits}")
        if letter == "I":
            return cls.identity(n_qubits)
        if letter not in "XYZ":
            raise PauliError(f"invalid Pauli letter {letter!r}")
        bit = 1 << qubit
        x = bit if letter in "XY" else 0
        z = bit if letter in "YZ" else 0
        return cls(n_qubits, x, z)

    # -- basic queries ----------------------------------------------------

    def to_label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    def letter(self, qubit: int) -> str:
        x = (self.x >> qubit) & 1
        z = (self.z >> qubit) & 1
        return "IZXY"[2 * x + z]

    def weight(self) -> int:
        """Number of non-identity letters."""
        return (self.x | self.z).bit_count()

    def support(self) -> tuple[int, ...]:
        """Qubit indices carrying a non-identity letter."""
        bits = self.x | self.z
        return tuple(q for q in range(self.n_qubits) if (bits >> q) & 1)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    # -- algebra -----------------------------------------------------------

    def __mul__(self, other: "PauliString") -> "PauliString":
        _check_same_size(self, other)
        return PauliString(self.n_qubits, self.x ^ other.x, self.z ^ other.z)

    def commutes(self, other: "PauliString") -> bool:
        """True iff the symplectic inner product vanishes (operators commute)."""
        _check_same_size(self, other)
        return ((self.x & other.z) ^ (self.z & other.x)).bit_count() % 2 == 0

    def xi_reduce(self) -> "PauliString":
        """Map Z -> I and Y -> X (clear the z bits).

        On computational-basis boundary states the original and reduced
        strings act identically up to a global phase.
        """
        return PauliString(self.n_qubits, self.x, 0)

    def lex_key(self) -> int:
        """Sort key for the I < X < Y < Z per-qubit order, qubit 0 most significant."""
        key = 0
        for q in range(self.n_qubits):
            code = _CODE_FROM_BITS[2 * ((self.x >> q) & 1) + ((self.z >> q) & 1)]
            key = (key << 2) | code
        return key

    # -- dunder plumbing ---------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and self.n_qubits == other.n_qubits
            and self.x == other.x
            and self.z == other.z
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"PauliString('{self.to_label()}')"

    def __iter__(self) -> Iterator[str]:
        return (self.letter(q) for q in range(self.n_qubits))


# -- module-level operation aliases (functional style) ----------------------


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Channel-level product of two Pauli strings (phase discarded)."""
    return a * b


def commutes(a: PauliString, b: PauliString) -> bool:
    return a.commutes(b)


def weight(p: PauliString) -> int:
    return p.weight()


def xi_reduce(p: PauliString) -> PauliString:
    return p.xi_reduce()


def lex_compare(a: PauliString, b: PauliString) -> int:
    """-1/0/+1 ordering with I < X < Y < Z per qubit, qubit 0 most significant."""
    _check_same_size(a, b)
    ka, kb = a.lex_key(), b.lex_key()
    return (ka > kb) - (ka < kb)


def all_paulis(n_qubits: int) -> Iterator[PauliString]:
    """All 4**n Pauli strings in lexicographic order."""
    for key in range(4 ** n_qubits):
        x = z = 0
        for q in range(n_qubits):
            code = (key >> (2 * (n_qubits - 1 - q))) & 3
            xb, zb = _BITS_FROM_CODE[code]
            x |= xb << q
            z |= zb << q
        yield PauliString(n_qubits, x, z)
