"""Pauli channel representations: dense coefficient maps and sparse products.

A dense channel stores ``{PauliString: coefficient}``.  Forward channels have
nonnegative coefficients summing to one; inverses keep the unit trace but may
carry negative coefficients.  The sampling overhead ``gamma`` of a channel is
the sum of absolute coefficients, and the variance of a quasi-probability
estimator scales with ``gamma**2``.

Sparse product channels hold an ordered list of two-term factors
``w*I + (1-w)*P`` (or the inverse form ``(w*I - (1-w)*P)/(2w-1)``) plus any
partially expanded dense factors.  All two-term factors are diagonal maps and
commute, so reordering, merging and partial expansion are exact.

Inversion of a dense channel reciprocates its Pauli eigenvalues
``f_Q = sum_P c_P * (-1)**<P,Q>`` on the subgroup generated by the channel
support, via a Walsh-Hadamard transform of size ``2**rank``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .paulis import PauliString, all_paulis

COEF_FLOOR = 1e-300  # stored-zero cutoff
TRACE_TOL = 1e-12
MAX_SUBGROUP_RANK = 24  # inversion hard cap: 2**24 eigenvalues


class ChannelError(ValueError):
    """Invalid channel construction or operation."""


class NonInvertibleChannelError(ChannelError):
    """A Pauli eigenvalue of the channel vanishes."""

    def __init__(self, pauli: PauliString):
        self.pauli = pauli
        super().__init__(
            f"channel has zero eigenvalue on Pauli {pauli.to_label()!r}"
        )


# --------------------------------------------------------------------------
# Dense channels
# --------------------------------------------------------------------------


class DensePauliChannel:
    """Sparse map from PauliString to a real coefficient."""

    __slots__ = ("n_qubits", "terms")

    def __init__(self, n_qubits: int, terms: Mapping[PauliString, float]):
        self.n_qubits = n_qubits
        clean: dict[PauliString, float] = {}
        for p, c in terms.items():
            if p.n_qubits != n_qubits:
                raise ChannelError(
                    f"term {p.to_label()} has {p.n_qubits} qubits, expected {n_qubits}"
                )
            if abs(c) >= COEF_FLOOR:
                clean[p] = float(c)
        self.terms = clean

    @classmethod
    def identity(cls, n_qubits: int) -> "DensePauliChannel":
        return cls(n_qubits, {PauliString.identity(n_qubits): 1.0})

    @property
    def trace_sum(self) -> float:
        return sum(self.terms.values())

    @property
    def is_forward(self) -> bool:
        return (
            all(c >= 0 for c in self.terms.values())
            and abs(self.trace_sum - 1.0) < 1e-9
        )

    def coefficient(self, p: PauliString) -> float:
        return self.terms.get(p, 0.0)

    def support_qubits(self) -> tuple[int, ...]:
        bits = 0
        for p in self.terms:
            bits |= p.x | p.z
        return tuple(q for q in range(self.n_qubits) if (bits >> q) & 1)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DensePauliChannel)
            and self.n_qubits == other.n_qubits
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        items = ", ".join(
            f"{p.to_label()}: {c:.6g}" for p, c in list(self.terms.items())[:6]
        )
        more = "" if len(self.terms) <= 6 else f", ... ({len(self.terms)} terms)"
        return f"DensePauliChannel({self.n_qubits}q, {{{items}{more}}})"


def gamma_dense(c: DensePauliChannel) -> float:
    """Sampling overhead: sum of absolute coefficients."""
    return float(sum(abs(v) for v in c.terms.values()))


def multiply_dense(a: DensePauliChannel, b: DensePauliChannel) -> DensePauliChannel:
    """Composition of two diagonal Pauli channels (XOR convolution)."""
    if a.n_qubits != b.n_qubits:
        raise ChannelError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")
    out: dict[PauliString, float] = {}
    for pa, ca in a.terms.items():
        for pb, cb in b.terms.items():
            key = pa * pb
            out[key] = out.get(key, 0.0) + ca * cb
    return DensePauliChannel(a.n_qubits, out)


def truncate(
    c: DensePauliChannel, epsilon: float
) -> tuple[DensePauliChannel, float]:
    """Drop terms with ``|coef| < epsilon``; report the removed absolute mass.

    The remaining coefficients are deliberately not renormalized: the
    truncation bias is surfaced, never hidden.
    """
    if epsilon < 0:
        raise ChannelError("epsilon must be nonnegative")
    kept: dict[PauliString, float] = {}
    dropped = 0.0
    for p, v in c.terms.items():
        if abs(v) < epsilon:
            dropped += abs(v)
        else:
            kept[p] = v
    return DensePauliChannel(c.n_qubits, kept), dropped


def pauli_fidelity(c: DensePauliChannel, q: PauliString) -> float:
    """Eigenvalue of the channel on Pauli ``q``."""
    if q.n_qubits != c.n_qubits:
        raise ChannelError("Pauli dimension mismatch")
    total = 0.0
    for p, v in c.terms.items():
        total += v if p.commutes(q) else -v
    return total


def depolarizing_channel(p: float, n_qubits: int = 2) -> DensePauliChannel:
    """Uniform Pauli error with total probability ``p`` on ``n_qubits`` qubits."""
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"error probability {p} outside [0, 1]")
    dim = 4 ** n_qubits
    terms: dict[PauliString, float] = {PauliString.identity(n_qubits): 1.0 - p}
    if p > 0:
        share = p / (dim - 1)
        for q in all_paulis(n_qubits):
            if not q.is_identity:
                terms[q] = share
    return DensePauliChannel(n_qubits, terms)


def random_pauli_channel(
    n_qubits: int, p: float, rng: np.random.Generator
) -> DensePauliChannel:
    """Random Pauli error channel: identity weight ``1-p``, the rest spread
    over the non-identity Paulis with Dirichlet(1,...,1) proportions."""
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"error probability {p} outside [0, 1]")
    dim = 4 ** n_qubits
    shares = rng.dirichlet(np.ones(dim - 1)) * p
    terms = {PauliString.identity(n_qubits): 1.0 - p}
    idx = 0
    for q in all_paulis(n_qubits):
        if q.is_identity:
            continue
        terms[q] = float(shares[idx])
        idx += 1
    return DensePauliChannel(n_qubits, terms)


def embed_channel(
    c: DensePauliChannel, n_qubits: int, qubit_map: Sequence[int]
) -> DensePauliChannel:
    """Embed a small channel into a larger register (identity elsewhere)."""
    if len(qubit_map) != c.n_qubits:
        raise ChannelError("qubit_map length must match channel size")
    terms: dict[PauliString, float] = {}
    for p, v in c.terms.items():
        x = z = 0
        for small, big in enumerate(qubit_map):
            x |= ((p.x >> small) & 1) << big
            z |= ((p.z >> small) & 1) << big
        terms[PauliString(n_qubits, x, z)] = v
    return DensePauliChannel(n_qubits, terms)


# --------------------------------------------------------------------------
# Inversion via subgroup Walsh transform
# --------------------------------------------------------------------------


def _f2_basis(vectors: Iterable[int]) -> list[int]:
    """Basis with distinct leading bits for the F2 span of ``vectors``."""
    pivots: dict[int, int] = {}
    for v in vectors:
        while v:
            pb = v.bit_length() - 1
            if pb in pivots:
                v ^= pivots[pb]
            else:
                pivots[pb] = v
                break
    return [pivots[k] for k in sorted(pivots, reverse=True)]


def _f2_coords(v: int, basis: Sequence[int]) -> int | None:
    """Coordinates of ``v`` in the span of ``basis`` (None if outside)."""
    coords = 0
    for i, b in enumerate(basis):
        if (v >> (b.bit_length() - 1)) & 1:
            v ^= b
            coords |= 1 << i
    return coords if v == 0 else None


def _wht_inplace(vec: np.ndarray) -> None:
    """Unnormalized fast Walsh-Hadamard transform."""
    n = vec.shape[0]
    h = 1
    while h < n:
        vec_r = vec.reshape(-1, 2 * h)
        a = vec_r[:, :h].copy()
        b = vec_r[:, h:]
        vec_r[:, :h] = a + b
        vec_r[:, h:] = a - b
        h *= 2


def _pack(p: PauliString) -> int:
    return p.x | (p.z << p.n_qubits)


def _unpack(v: int, n_qubits: int) -> PauliString:
    mask = (1 << n_qubits) - 1
    return PauliString(n_qubits, v & mask, v >> n_qubits)


def _symplectic_partner(v: int, n_qubits: int) -> int:
    """Swap the x and z halves; <a, b>_SP == popcount(a & partner(b)) mod 2."""
    mask = (1 << n_qubits) - 1
    return ((v & mask) << n_qubits) | (v >> n_qubits)


def invert_dense(c: DensePauliChannel) -> DensePauliChannel:
    """Channel whose Pauli eigenvalues are the reciprocals of ``c``'s.

    Works on the subgroup generated by the support of ``c``: the eigenvalues
    are obtained by a Walsh-Hadamard transform over the subgroup coordinates,
    reciprocated, and transformed back.  Composition with ``c`` is the
    identity in the Pauli transfer representation.
    """
    n = c.n_qubits
    if not c.terms:
        raise ChannelError("cannot invert an empty channel")
    packed = {_pack(p): v for p, v in c.terms.items()}
    basis = _f2_basis(packed)
    rank = len(basis)
    if rank > MAX_SUBGROUP_RANK:
        raise ChannelError(
            f"support subgroup rank {rank} exceeds the inversion cap "
            f"{MAX_SUBGROUP_RANK}"
        )
    size = 1 << rank
    vec = np.zeros(size, dtype=float)
    for v, coef in packed.items():
        coords = _f2_coords(v, basis)
        # support elements always lie in their own span
        vec[coords] += coef
    _wht_inplace(vec)
    zero = np.abs(vec) < 1e-14
    if np.any(zero):
        s = int(np.argmax(zero))
        raise NonInvertibleChannelError(_find_eigen_pauli(basis, s, n))
    vec = 1.0 / vec
    _wht_inplace(vec)
    vec /= size
    terms: dict[PauliString, float] = {}
    for coords in range(size):
        coef = float(vec[coords])
        if abs(coef) < COEF_FLOOR:
            continue
        v = 0
        for i in range(rank):
            if (coords >> i) & 1:
                v ^= basis[i]
        terms[_unpack(v, n)] = coef
    return DensePauliChannel(n, terms)


def _find_eigen_pauli(basis: Sequence[int], s: int, n_qubits: int) -> PauliString:
    """A Pauli Q with <g_i, Q>_SP = s_i for the subgroup generators g_i.

    Solves the F2 linear system rows[i] . Q = s_i where
    rows[i] = symplectic partner of g_i (x/z halves swapped).
    """
    rows = [_symplectic_partner(b, n_qubits) for b in basis]
    rhs = [(s >> i) & 1 for i in range(len(basis))]
    # forward elimination; the rows are independent because the generators are
    echelon: list[tuple[int, int, int]] = []  # (row, rhs bit, pivot bit)
    for r, b in zip(rows, rhs):
        for er, eb, ebit in echelon:
            if (r >> ebit) & 1:
                r ^= er
                b ^= eb
        pivot = r.bit_length() - 1
        echelon.append((r, b, pivot))
    q = 0
    for r, b, pivot in reversed(echelon):
        if ((r & q).bit_count() & 1) != b:
            q ^= 1 << pivot
    return _unpack(q, n_qubits)


# --------------------------------------------------------------------------
# Sparse product channels
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductTerm:
    """One two-term factor ``w*I + (1-w)*P`` (``inverted`` flips the sign of
    the ``(1-w)`` part and normalizes by ``2w - 1``)."""

    w: float
    pauli: PauliString
    inverted: bool = False
    rate: float | None = None

    def __post_init__(self):
        if not 0.5 < self.w <= 1.0:
            raise ChannelError(f"product term weight {self.w} must be in (1/2, 1]")

    @property
    def gamma(self) -> float:
        return 1.0 / (2.0 * self.w - 1.0) if self.inverted else 1.0

    def as_dense(self, n_qubits: int) -> DensePauliChannel:
        ident = PauliString.identity(n_qubits)
        if self.inverted:
            norm = 2.0 * self.w - 1.0
            pieces = [(ident, self.w / norm), (self.pauli, -(1.0 - self.w) / norm)]
        else:
            pieces = [(ident, self.w), (self.pauli, 1.0 - self.w)]
        terms: dict[PauliString, float] = {}
        for p, v in pieces:  # the Pauli may itself be the identity
            terms[p] = terms.get(p, 0.0) + v
        return DensePauliChannel(n_qubits, terms)


@dataclass(frozen=True)
class SplChannel:
    """Product-form channel: two-term factors plus partially expanded sums."""

    n_qubits: int
    product_terms: tuple[ProductTerm, ...]
    expanded_factors: tuple[DensePauliChannel, ...] = ()

    def __post_init__(self):
        for t in self.product_terms:
            if t.pauli.n_qubits != self.n_qubits:
                raise ChannelError("product term dimension mismatch")
        for f in self.expanded_factors:
            if f.n_qubits != self.n_qubits:
                raise ChannelError("expanded factor dimension mismatch")

    @property
    def n_terms(self) -> int:
        return len(self.product_terms)

    def invert(self) -> "SplChannel":
        """Flip every factor between forward and inverse form."""
        return replace(
            self,
            product_terms=tuple(
                replace(t, inverted=not t.inverted) for t in self.product_terms
            ),
            expanded_factors=tuple(
                invert_dense(f) for f in self.expanded_factors
            ),
        )

    def to_dense(self) -> DensePauliChannel:
        """Full expansion (exponential in general; for tests and small n)."""
        out = DensePauliChannel.identity(self.n_qubits)
        for t in self.product_terms:
            out = multiply_dense(out, t.as_dense(self.n_qubits))
        for f in self.expanded_factors:
            out = multiply_dense(out, f)
        return out


def gamma_spl(c: SplChannel) -> float:
    """Overhead of the product form: per-term ``(2w-1)**-1`` for inverted
    factors times the absolute-coefficient sums of the expanded factors."""
    g = 1.0
    for t in c.product_terms:
        g *= t.gamma
    for f in c.expanded_factors:
        g *= gamma_dense(f)
    return g


def merge_equal_terms(c: SplChannel) -> SplChannel:
    """Fuse product terms with identical Pauli and identical orientation.

    Two factors with the same jump Pauli combine into one with
    ``w3 = w1*w2 + (1-w1)*(1-w2)``; the overhead is unchanged because
    ``(2w1-1)(2w2-1) = 2*w3 - 1``.
    """
    merged: dict[tuple[PauliString, bool], ProductTerm] = {}
    order: list[tuple[PauliString, bool]] = []
    for t in c.product_terms:
        key = (t.pauli, t.inverted)
        if key in merged:
            prev = merged[key]
            w3 = prev.w * t.w + (1.0 - prev.w) * (1.0 - t.w)
            merged[key] = replace(prev, w=w3, rate=None)
        else:
            merged[key] = t
            order.append(key)
    return replace(c, product_terms=tuple(merged[k] for k in order))


def xi_reduce_spl(c: SplChannel) -> SplChannel:
    """Clear the z bits of every term Pauli (valid on the computational-basis
    boundary, where Z acts as identity and Y as X up to phase)."""
    return replace(
        c,
        product_terms=tuple(
            replace(t, pauli=t.pauli.xi_reduce()) for t in c.product_terms
        ),
        expanded_factors=tuple(
            _xi_reduce_dense(f) for f in c.expanded_factors
        ),
    )


def _xi_reduce_dense(c: DensePauliChannel) -> DensePauliChannel:
    out: dict[PauliString, float] = {}
    for p, v in c.terms.items():
        key = p.xi_reduce()
        out[key] = out.get(key, 0.0) + v
    return DensePauliChannel(c.n_qubits, out)


def passive_reduction(c: SplChannel) -> SplChannel:
    """Drop product terms whose Pauli is the identity.

    Intended for use after ``xi_reduce_spl``: a term that contained only Z/I
    letters reduces to ``(w*I +/- (1-w)*I)``, which for the inverse form
    cancels its own ``(2w-1)**-1`` overhead exactly.  The boundary action is
    unchanged; gamma drops by the product of the removed terms' overheads.
    """
    kept = tuple(t for t in c.product_terms if not t.pauli.is_identity)
    return replace(c, product_terms=kept)


def expand_guided(
    c: SplChannel,
    max_factor_terms: int = 4096,
    strategy: str = "lexicographic_support",
) -> SplChannel:
    """Move product terms into explicitly expanded factors.

    Terms are taken in lexicographic Pauli order (or list order for
    ``plain_order``).  A factor is seeded with the product of the first two
    terms; each following step absorbs the first remaining term whose support
    lies inside the factor's accumulated qubit support, falling back to the
    next term in order.  When absorbing a term would push a factor past
    ``max_factor_terms`` coefficients, the factor is closed and a new one is
    started.  The represented map is unchanged and the overhead never grows.
    """
    if max_factor_terms < 1:
        raise ChannelError("max_factor_terms must be >= 1")
    if strategy not in ("lexicographic_support", "plain_order"):
        raise ChannelError(f"unknown expansion strategy {strategy!r}")
    if max_factor_terms < 4 or len(c.product_terms) < 2:
        # cannot even hold the seed product of two 2-term factors
        return c

    terms = list(c.product_terms)
    if strategy == "lexicographic_support":
        terms.sort(key=lambda t: t.pauli.lex_key())

    if all(t.pauli.z == 0 for t in terms):
        return _expand_guided_xonly(c, terms, max_factor_terms)

    factors: list[DensePauliChannel] = list(c.expanded_factors)
    current: DensePauliChannel | None = None
    support_bits = 0

    def absorb(factor: DensePauliChannel, term: ProductTerm) -> DensePauliChannel:
        return multiply_dense(factor, term.as_dense(c.n_qubits))

    while terms:
        if current is None:
            t = terms.pop(0)
            current = t.as_dense(c.n_qubits)
            support_bits = t.pauli.x | t.pauli.z
            continue
        pick = 0
        for i, t in enumerate(terms):
            bits = t.pauli.x | t.pauli.z
            if (bits & ~support_bits) == 0:
                pick = i
                break
        t = terms[pick]
        candidate = absorb(current, t)
        if len(candidate) > max_factor_terms:
            # close the factor; the term seeds the next one
            factors.append(current)
            current = None
            continue
        terms.pop(pick)
        current = candidate
        support_bits |= t.pauli.x | t.pauli.z
    if current is not None:
        factors.append(current)
    return replace(c, product_terms=(), expanded_factors=tuple(factors))


def _expand_guided_xonly(
    c: SplChannel, terms: list[ProductTerm], max_factor_terms: int
) -> SplChannel:
    """Guided expansion for X/I-only terms (post boundary reduction).

    A factor is a coefficient vector over its local support qubits; absorbing
    a two-term factor is a scaled XOR-shifted addition, so large factor
    budgets stay cheap.
    """
    factors: list[DensePauliChannel] = list(c.expanded_factors)
    support: list[int] = []
    vec: np.ndarray | None = None

    def local_x(pauli: PauliString) -> int:
        x = 0
        for i, q in enumerate(support):
            x |= ((pauli.x >> q) & 1) << i
        return x

    def close() -> None:
        nonlocal vec, support
        if vec is None:
            return
        terms_map: dict[PauliString, float] = {}
        for idx in np.nonzero(vec)[0]:
            x = 0
            li = int(idx)
            for i, q in enumerate(support):
                x |= ((li >> i) & 1) << q
            terms_map[PauliString(c.n_qubits, x, 0)] = float(vec[idx])
        factors.append(DensePauliChannel(c.n_qubits, terms_map))
        vec = None
        support = []

    def grown_support(pauli: PauliString) -> list[int]:
        extra = [q for q in pauli.support() if q not in support]
        return support + extra

    while terms:
        if vec is None:
            t = terms.pop(0)
            support = list(t.pauli.support())
            vec = np.zeros(1 << len(support))
            td = t.as_dense(c.n_qubits)
            for p, v in td.terms.items():
                vec[local_x(p)] += v
            continue
        support_mask = 0
        for q in support:
            support_mask |= 1 << q
        pick = 0
        for i, t in enumerate(terms):
            if (t.pauli.x & ~support_mask) == 0:
                pick = i
                break
        t = terms[pick]
        new_support = grown_support(t.pauli)
        if (1 << len(new_support)) > max_factor_terms and len(new_support) > len(
            support
        ):
            close()
            continue
        terms.pop(pick)
        if len(new_support) > len(support):
            grown = np.zeros(1 << len(new_support))
            grown[: vec.shape[0]] = vec
            support = new_support
            vec = grown
        xl = local_x(t.pauli)
        if t.inverted:
            norm = 2.0 * t.w - 1.0
            a, b = t.w / norm, -(1.0 - t.w) / norm
        else:
            a, b = t.w, 1.0 - t.w
        if xl == 0:
            vec = (a + b) * vec
        else:
            vec = a * vec + b * vec[np.arange(vec.shape[0]) ^ xl]
    close()
    return replace(c, product_terms=(), expanded_factors=tuple(factors))


# --------------------------------------------------------------------------
# Noise model specifications
# --------------------------------------------------------------------------

NOISE_KINDS = (
    "depolarizing_gate_level",
    "spl_linear_topology",
    "random_pauli_gate_level",
)


@dataclass(frozen=True)
class NoiseModelSpec:
    kind: str
    p: float | None = None
    pauli_fidelity: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ChannelError(f"unknown noise kind {self.kind!r}")
        if self.kind in ("depolarizing_gate_level", "random_pauli_gate_level"):
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ChannelError("gate-level noise needs p in [0, 1]")
        if self.kind == "spl_linear_topology":
            f = self.pauli_fidelity
            if f is None or not 0.0 <= f <= 1.0:
                raise ChannelError("SPL noise needs pauli_fidelity in [0, 1]")


def spl_model_paulis(n_qubits: int) -> list[PauliString]:
    """The linear-topology model support: all weight-1 strings plus all
    weight-2 strings on nearest-neighbor pairs (3n + 9(n-1) Paulis)."""
    out = []
    for q in range(n_qubits):
        for letter in "XYZ":
            out.append(PauliString.single(n_qubits, q, letter))
    for q in range(n_qubits - 1):
        for a in "XYZ":
            for b in "XYZ":
                out.append(
                    PauliString.single(n_qubits, q, a)
                    * PauliString.single(n_qubits, q + 1, b)
                )
    return out


def build_spl_model(n_qubits: int, spec: NoiseModelSpec) -> SplChannel:
    """Homogeneous sparse product noise model on a linear topology with
    ``w = (1 + f)/2`` for every model Pauli."""
    if spec.kind != "spl_linear_topology":
        raise ChannelError("build_spl_model needs an spl_linear_topology spec")
    f = spec.pauli_fidelity
    w = 0.5 * (1.0 + f)
    if f >= 1.0:
        return SplChannel(n_qubits, ())
    rate = -0.5 * math.log(2.0 * w - 1.0)
    terms = tuple(
        ProductTerm(w=w, pauli=p, inverted=False, rate=rate)
        for p in spl_model_paulis(n_qubits)
    )
    return SplChannel(n_qubits, terms)


def spl_pair_channel(
    n_qubits: int, pair: tuple[int, int], f: float
) -> SplChannel:
    """Gate-local SPL factor: weight-1 terms on the two qubits of a pair plus
    the nine weight-2 terms across the pair (15 model Paulis)."""
    w = 0.5 * (1.0 + f)
    if f >= 1.0:
        return SplChannel(n_qubits, ())
    a, b = pair
    paulis = []
    for q in (a, b):
        for letter in "XYZ":
            paulis.append(PauliString.single(n_qubits, q, letter))
    for la in "XYZ":
        for lb in "XYZ":
            paulis.append(
                PauliString.single(n_qubits, a, la)
                * PauliString.single(n_qubits, b, lb)
            )
    return SplChannel(
        n_qubits, tuple(ProductTerm(w=w, pauli=p) for p in paulis)
    )


# --------------------------------------------------------------------------
# JSON dumps
# --------------------------------------------------------------------------


def _fmt(x: float) -> float:
    return float(format(x, ".17g"))


def dense_to_dict(c: DensePauliChannel) -> dict:
    return {
        "n_qubits": c.n_qubits,
        "terms": [
            {"pauli": p.to_label(), "coef": _fmt(v)}
            for p, v in sorted(c.terms.items(), key=lambda kv: kv[0].lex_key())
        ],
    }


def dense_from_dict(data: dict) -> DensePauliChannel:
    terms = {
        PauliString.from_label(t["pauli"]): float(t["coef"])
        for t in data["terms"]
    }
    return DensePauliChannel(data["n_qubits"], terms)


def spl_to_dict(c: SplChannel) -> dict:
    return {
        "n_qubits": c.n_qubits,
        "product_terms": [
            {"pauli": t.pauli.to_label(), "w": _fmt(t.w), "inverted": t.inverted}
            for t in c.product_terms
        ],
        "expanded_factors": [dense_to_dict(f) for f in c.expanded_factors],
    }


def spl_from_dict(data: dict) -> SplChannel:
    return SplChannel(
        data["n_qubits"],
        tuple(
            ProductTerm(
                w=float(t["w"]),
                pauli=PauliString.from_label(t["pauli"]),
                inverted=bool(t.get("inverted", False)),
            )
            for t in data["product_terms"]
        ),
        tuple(dense_from_dict(f) for f in data.get("expanded_factors", [])),
    )


def dump_channel(c, path) -> None:
    data = dense_to_dict(c) if isinstance(c, DensePauliChannel) else spl_to_dict(c)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
