"""Channel representations: inversion, overhead, products, reductions.

Independent oracles: explicit Pauli-transfer-matrix (PTM) construction,
inversion, and multiplication with numpy dense linear algebra.
"""

import math

import numpy as np
import pytest

from pmit.channels import (
    ChannelError,
    DensePauliChannel,
    NoiseModelSpec,
    NonInvertibleChannelError,
    ProductTerm,
    SplChannel,
    build_spl_model,
    dense_from_dict,
    dense_to_dict,
    depolarizing_channel,
    expand_guided,
    gamma_dense,
    gamma_spl,
    invert_dense,
    merge_equal_terms,
    multiply_dense,
    passive_reduction,
    pauli_fidelity,
    random_pauli_channel,
    spl_from_dict,
    spl_to_dict,
    truncate,
    xi_reduce_spl,
)
from pmit.paulis import PauliString, all_paulis

# --------------------------------------------------------------------------
# PTM oracle helpers
# --------------------------------------------------------------------------


def ptm(channel: DensePauliChannel) -> np.ndarray:
    """Diagonal Pauli transfer matrix of a Pauli channel."""
    paulis = list(all_paulis(channel.n_qubits))
    diag = []
    for q in paulis:
        val = 0.0
        for p, c in channel.terms.items():
            val += c if p.commutes(q) else -c
        diag.append(val)
    return np.diag(diag)


def channel_from_ptm_diag(diag: np.ndarray, n: int) -> DensePauliChannel:
    """Inverse Walsh transform of a PTM diagonal back to coefficients."""
    paulis = list(all_paulis(n))
    terms = {}
    for p in paulis:
        coef = 0.0
        for q, f in zip(paulis, diag):
            coef += f * (1.0 if p.commutes(q) else -1.0)
        coef /= 4 ** n
        if abs(coef) > 1e-15:
            terms[p] = coef
    return DensePauliChannel(n, terms)


def random_signed_channel(n, rng, trace_one=True) -> DensePauliChannel:
    """Random channel with random sparse support and signed coefficients."""
    paulis = list(all_paulis(n))
    k = int(rng.integers(2, min(10, len(paulis)) + 1))
    pick = rng.choice(len(paulis), size=k, replace=False)
    coefs = rng.normal(size=k)
    if trace_one:
        coefs /= coefs.sum() if abs(coefs.sum()) > 1e-3 else 1.0
    terms = {paulis[i]: float(c) for i, c in zip(pick, coefs)}
    terms[PauliString.identity(n)] = terms.get(PauliString.identity(n), 0.0) + (
        1.0 - sum(terms.values())
    )
    return DensePauliChannel(n, terms)


def random_forward_channel(n, rng, strength=0.2) -> DensePauliChannel:
    paulis = list(all_paulis(n))
    k = int(rng.integers(1, min(8, len(paulis) - 1) + 1))
    pick = rng.choice(len(paulis) - 1, size=k, replace=False) + 1
    raw = rng.random(k)
    raw = strength * raw / raw.sum()
    terms = {paulis[i]: float(c) for i, c in zip(pick, raw)}
    terms[PauliString.identity(n)] = 1.0 - strength
    return DensePauliChannel(n, terms)


# --------------------------------------------------------------------------
# Dense channels
# --------------------------------------------------------------------------


class TestDepolarizing:
    def test_p_zero_identity(self):
        ch = depolarizing_channel(0.0, 2)
        assert ch.terms == {PauliString.identity(2): 1.0}

    def test_p_002(self):
        ch = depolarizing_channel(0.02, 2)
        assert ch.terms[PauliString.identity(2)] == pytest.approx(0.98)
        others = [c for p, c in ch.terms.items() if not p.is_identity]
        assert len(others) == 15
        assert all(c == pytest.approx(0.02 / 15) for c in others)

    def test_p_one_uniform(self):
        ch = depolarizing_channel(1.0, 2)
        assert PauliString.identity(2) not in ch.terms
        assert all(c == pytest.approx(1 / 15) for c in ch.terms.values())

    def test_range_check(self):
        with pytest.raises(ChannelError):
            depolarizing_channel(1.5, 2)


class TestInvertDense:
    def test_identity(self):
        ident = DensePauliChannel.identity(2)
        assert invert_dense(ident).terms == ident.terms

    def test_single_qubit_x_flip(self):
        ch = DensePauliChannel(
            1, {PauliString.from_label("I"): 0.9, PauliString.from_label("X"): 0.1}
        )
        inv = invert_dense(ch)
        # oracle: 4x4 PTM inversion
        oracle = channel_from_ptm_diag(1.0 / np.diag(ptm(ch)), 1)
        for p in all_paulis(1):
            assert inv.coefficient(p) == pytest.approx(oracle.coefficient(p), abs=1e-12)
        # frozen values from the PTM oracle
        assert inv.coefficient(PauliString.from_label("I")) == pytest.approx(1.125)
        assert inv.coefficient(PauliString.from_label("X")) == pytest.approx(-0.125)
        comp = multiply_dense(inv, ch)
        assert comp.coefficient(PauliString.identity(1)) == pytest.approx(1.0)
        assert gamma_dense(comp) == pytest.approx(1.0, abs=1e-12)

    def test_depolarizing_vs_ptm_oracle(self):
        ch = depolarizing_channel(0.02, 2)
        inv = invert_dense(ch)
        oracle = channel_from_ptm_diag(1.0 / np.diag(ptm(ch)), 2)
        for p in all_paulis(2):
            assert inv.coefficient(p) == pytest.approx(oracle.coefficient(p), abs=1e-12)
        assert gamma_dense(inv) > 1.0
        assert gamma_dense(inv) == pytest.approx(gamma_dense(oracle))

    def test_two_sided_inverse_random(self):
        rng = np.random.default_rng(12)
        for _ in range(40):
            n = int(rng.integers(1, 4))
            ch = random_forward_channel(n, rng)
            inv = invert_dense(ch)
            comp = ptm(multiply_dense(inv, ch))
            assert np.max(np.abs(comp - np.eye(4 ** n))) < 1e-10
            comp2 = ptm(multiply_dense(ch, inv))
            assert np.max(np.abs(comp2 - np.eye(4 ** n))) < 1e-10

    def test_non_invertible_names_pauli(self):
        # eigenvalue on Z vanishes: f_Z = 0.5 - 0.5 = 0
        ch = DensePauliChannel(
            1, {PauliString.from_label("I"): 0.5, PauliString.from_label("X"): 0.5}
        )
        with pytest.raises(NonInvertibleChannelError) as err:
            invert_dense(ch)
        assert err.value.pauli.to_label() in ("Z", "Y")


class TestGamma:
    def test_forward_is_one(self):
        assert gamma_dense(depolarizing_channel(0.3, 2)) == pytest.approx(1.0)

    def test_signed_sum(self):
        ch = DensePauliChannel(
            1, {PauliString.from_label("I"): 1.2, PauliString.from_label("X"): -0.2}
        )
        assert gamma_dense(ch) == pytest.approx(1.4)

    def test_depolarizing_inverse_value(self):
        inv = invert_dense(depolarizing_channel(0.02, 2))
        oracle = channel_from_ptm_diag(1.0 / np.diag(ptm(depolarizing_channel(0.02, 2))), 2)
        assert gamma_dense(inv) == pytest.approx(gamma_dense(oracle))
        assert gamma_dense(inv) == pytest.approx(1.0408719346, abs=1e-9)


class TestMultiplyDense:
    def test_identity(self):
        rng = np.random.default_rng(3)
        a = random_signed_channel(2, rng)
        prod = multiply_dense(a, DensePauliChannel.identity(2))
        for p in all_paulis(2):
            assert prod.coefficient(p) == pytest.approx(a.coefficient(p))

    def test_two_term_cancellation(self):
        w = 0.99
        i1 = PauliString.from_label("I")
        x1 = PauliString.from_label("X")
        a = DensePauliChannel(1, {i1: w, x1: 1 - w})
        b = DensePauliChannel(1, {i1: w, x1: -(1 - w)})
        prod = multiply_dense(a, b)
        # direct 2-term expansion: X components cancel exactly
        assert prod.coefficient(x1) == pytest.approx(0.0, abs=1e-15)
        assert prod.coefficient(i1) == pytest.approx(w * w - (1 - w) ** 2)
        assert gamma_dense(prod) < gamma_dense(a) * gamma_dense(b)

    def test_against_ptm_product(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            a = random_signed_channel(2, rng)
            b = random_signed_channel(2, rng)
            got = ptm(multiply_dense(a, b))
            want = ptm(a) @ ptm(b)
            assert np.max(np.abs(got - want)) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ChannelError):
            multiply_dense(
                DensePauliChannel.identity(1), DensePauliChannel.identity(2)
            )


class TestFusionInequality:
    def test_random_pairs(self):
        rng = np.random.default_rng(77)
        for _ in range(300):
            n = int(rng.integers(1, 5))
            a = random_signed_channel(n, rng)
            b = random_signed_channel(n, rng)
            fused = gamma_dense(multiply_dense(a, b))
            assert fused <= gamma_dense(a) * gamma_dense(b) + 1e-10


class TestTruncate:
    def test_epsilon_zero_identity(self):
        rng = np.random.default_rng(5)
        ch = random_signed_channel(2, rng)
        out, dropped = truncate(ch, 0.0)
        assert out.terms == ch.terms
        assert dropped == 0.0

    def test_dropped_mass_exact(self):
        ch = DensePauliChannel(
            1,
            {
                PauliString.from_label("I"): 1.0,
                PauliString.from_label("X"): 1e-8,
                PauliString.from_label("Y"): -2e-8,
            },
        )
        out, dropped = truncate(ch, 1e-7)
        assert set(out.terms) == {PauliString.from_label("I")}
        assert dropped == pytest.approx(3e-8, abs=1e-20)
        assert dropped == pytest.approx(gamma_dense(ch) - gamma_dense(out), abs=1e-15)

    def test_no_renormalization(self):
        ch = DensePauliChannel(
            1, {PauliString.from_label("I"): 0.9, PauliString.from_label("X"): 1e-9}
        )
        out, _ = truncate(ch, 1e-6)
        assert out.coefficient(PauliString.from_label("I")) == pytest.approx(0.9)


class TestPauliFidelity:
    def test_identity_channel(self):
        ident = DensePauliChannel.identity(2)
        for q in all_paulis(2):
            assert pauli_fidelity(ident, q) == pytest.approx(1.0)

    def test_identity_pauli_normalization(self):
        rng = np.random.default_rng(8)
        ch = random_forward_channel(2, rng)
        assert pauli_fidelity(ch, PauliString.identity(2)) == pytest.approx(1.0)

    def test_spl_single_term_fidelity(self):
        # a single product factor with w = (1+f)/2 has eigenvalue f on any
        # Pauli anticommuting with its jump operator
        f = 0.996
        term = ProductTerm(w=0.5 * (1 + f), pauli=PauliString.from_label("XI"))
        dense = term.as_dense(2)
        assert pauli_fidelity(dense, PauliString.from_label("ZI")) == pytest.approx(f)
        assert pauli_fidelity(dense, PauliString.from_label("XI")) == pytest.approx(1.0)


# --------------------------------------------------------------------------
# Sparse product channels
# --------------------------------------------------------------------------


class TestGammaSpl:
    def test_empty(self):
        assert gamma_spl(SplChannel(2, ())) == pytest.approx(1.0)

    def test_single_inverted_term(self):
        t = ProductTerm(w=0.998, pauli=PauliString.from_label("XI"), inverted=True)
        assert gamma_spl(SplChannel(2, (t,))) == pytest.approx(1.0 / 0.996)
        assert gamma_spl(SplChannel(2, (t,))) == pytest.approx(1.004016064257, abs=1e-9)

    def test_expanded_matches_dense(self):
        rng = np.random.default_rng(6)
        model = build_spl_model(
            3, NoiseModelSpec("spl_linear_topology", pauli_fidelity=0.95)
        ).invert()
        expanded = expand_guided(model, max_factor_terms=4096)
        assert gamma_spl(expanded) == pytest.approx(
            gamma_dense(model.to_dense()), rel=1e-10
        )


class TestMergeEqualTerms:
    def test_w3_formula(self):
        x = PauliString.from_label("X")
        c = SplChannel(
            1,
            (
                ProductTerm(w=0.9, pauli=x, inverted=True),
                ProductTerm(w=0.8, pauli=x, inverted=True),
            ),
        )
        merged = merge_equal_terms(c)
        assert merged.n_terms == 1
        assert merged.product_terms[0].w == pytest.approx(0.74)
        # overhead is unchanged: (2*0.74-1)^-1 == (0.8*0.6)^-1
        assert gamma_spl(merged) == pytest.approx(gamma_spl(c), rel=1e-12)
        assert gamma_spl(merged) == pytest.approx(1 / 0.48)

    def test_no_duplicates_unchanged(self):
        c = SplChannel(
            2,
            (
                ProductTerm(w=0.9, pauli=PauliString.from_label("XI")),
                ProductTerm(w=0.8, pauli=PauliString.from_label("IZ")),
            ),
        )
        assert merge_equal_terms(c) == c

    def test_preserves_map(self):
        x = PauliString.from_label("XI")
        c = SplChannel(
            2,
            (
                ProductTerm(w=0.9, pauli=x, inverted=True),
                ProductTerm(w=0.85, pauli=x, inverted=True),
                ProductTerm(w=0.7, pauli=PauliString.from_label("ZZ"), inverted=True),
            ),
        )
        merged = merge_equal_terms(c)
        a, b = c.to_dense(), merged.to_dense()
        for p in all_paulis(2):
            assert a.coefficient(p) == pytest.approx(b.coefficient(p), abs=1e-12)


class TestPassiveReduction:
    def test_z_only_term_removed(self):
        zz = ProductTerm(w=0.9, pauli=PauliString.from_label("ZZ"), inverted=True)
        xz = ProductTerm(w=0.9, pauli=PauliString.from_label("XZ"), inverted=True)
        c = SplChannel(2, (zz, xz))
        reduced = passive_reduction(xi_reduce_spl(c))
        assert reduced.n_terms == 1
        assert reduced.product_terms[0].pauli.to_label() == "XI"
        # gamma drops by exactly the removed term's overhead
        assert gamma_spl(reduced) == pytest.approx(gamma_spl(c) * (2 * 0.9 - 1))

    def test_no_zi_terms_unchanged(self):
        c = SplChannel(
            2, (ProductTerm(w=0.9, pauli=PauliString.from_label("XY"), inverted=True),)
        )
        assert passive_reduction(xi_reduce_spl(c)).n_terms == 1

    def test_boundary_action_preserved(self):
        # on |0..0><0..0| the reduced channel acts identically
        zz = ProductTerm(w=0.8, pauli=PauliString.from_label("ZZ"), inverted=True)
        xy = ProductTerm(w=0.9, pauli=PauliString.from_label("XY"), inverted=True)
        c = SplChannel(2, (zz, xy))
        reduced = passive_reduction(xi_reduce_spl(c))
        rho0 = np.zeros((4, 4), dtype=complex)
        rho0[0, 0] = 1.0
        from pmit.sim import _apply_channel_to_density

        full = _apply_channel_to_density(rho0.copy(), c, 2)
        red = _apply_channel_to_density(rho0.copy(), reduced, 2)
        # compare diagonal (computational-basis) action
        assert np.allclose(np.diag(full), np.diag(red), atol=1e-12)


class TestExpandGuided:
    def test_budget_one_no_expansion(self):
        model = build_spl_model(
            2, NoiseModelSpec("spl_linear_topology", pauli_fidelity=0.99)
        ).invert()
        out = expand_guided(model, max_factor_terms=1)
        assert out == model
        assert gamma_spl(out) == pytest.approx(gamma_spl(model))

    def test_single_qubit_group_compact(self):
        terms = tuple(
            ProductTerm(w=w, pauli=PauliString.from_label(lab))
            for w, lab in ((0.9, "X"), (0.8, "Y"), (0.7, "Z"))
        )
        out = expand_guided(SplChannel(1, terms), max_factor_terms=4096)
        assert out.product_terms == ()
        assert len(out.expanded_factors) == 1
        assert len(out.expanded_factors[0]) <= 4
        # represented map unchanged
        a = SplChannel(1, terms).to_dense()
        b = out.to_dense()
        for p in all_paulis(1):
            assert a.coefficient(p) == pytest.approx(b.coefficient(p), abs=1e-12)

    def test_gamma_monotone_in_budget(self):
        # fused device-model channels over random Clifford circuits: larger
        # factor budgets monotonically reduce the overhead down to the dense
        # value (the guarantee gamma(expanded) <= gamma(product form) holds
        # for any input; monotonicity is a property of this regime)
        from pmit.circuits import random_clifford_circuit
        from pmit.engine import _collect_channels
        from pmit.gates import propagate
        from pmit.noise import spl_noise

        for seed in (0, 1, 2):
            circ = random_clifford_circuit(4, 3, np.random.default_rng(seed))
            noise = spl_noise(circ, 0.98, attach="device")
            terms = []
            for li, ch in _collect_channels(circ, noise, None):
                for t in ch.product_terms:
                    moved, _ = propagate(t.pauli, circ, li, 0)
                    terms.append(ProductTerm(w=t.w, pauli=moved, inverted=True))
            c = merge_equal_terms(SplChannel(4, tuple(terms)))
            dense_gamma = gamma_dense(c.to_dense())
            budgets = [1, 4, 16, 64, 256, 1024]
            gammas = [gamma_spl(expand_guided(c, b)) for b in budgets]
            for g1, g2 in zip(gammas, gammas[1:]):
                assert g2 <= g1 + 1e-10
            assert gammas[-1] == pytest.approx(dense_gamma, rel=1e-9)
            assert all(g <= gamma_spl(c) + 1e-10 for g in gammas)

    def test_never_exceeds_product_form(self):
        # guaranteed for arbitrary signed product terms
        rng = np.random.default_rng(21)
        paulis = list(all_paulis(4))
        terms = tuple(
            ProductTerm(
                w=float(rng.uniform(0.9, 0.999)),
                pauli=paulis[int(rng.integers(1, len(paulis)))],
                inverted=True,
            )
            for _ in range(30)
        )
        c = SplChannel(4, terms)
        for budget in (4, 16, 64, 4096):
            assert gamma_spl(expand_guided(c, budget)) <= gamma_spl(c) + 1e-10
        assert gamma_spl(expand_guided(c, 4096)) == pytest.approx(
            gamma_dense(c.to_dense()), rel=1e-9
        )

    def test_xonly_fast_path_matches_generic(self):
        rng = np.random.default_rng(31)
        terms = tuple(
            ProductTerm(
                w=float(rng.uniform(0.9, 0.999)),
                pauli=PauliString(4, int(rng.integers(1, 16)), 0),
                inverted=True,
            )
            for _ in range(12)
        )
        c = SplChannel(4, terms)
        fast = expand_guided(c, 64)
        assert gamma_spl(fast) == pytest.approx(gamma_dense(c.to_dense()), rel=1e-9)


class TestSplModel:
    def test_term_counts(self):
        m2 = build_spl_model(2, NoiseModelSpec("spl_linear_topology", pauli_fidelity=0.99))
        assert m2.n_terms == 15
        m10 = build_spl_model(
            10, NoiseModelSpec("spl_linear_topology", pauli_fidelity=0.996)
        )
        assert m10.n_terms == 111
        assert all(t.w == pytest.approx(0.998) for t in m10.product_terms)

    def test_f_one_identity(self):
        m = build_spl_model(3, NoiseModelSpec("spl_linear_topology", pauli_fidelity=1.0))
        assert m.n_terms == 0
        assert gamma_spl(m) == pytest.approx(1.0)

    def test_weights_within_support(self):
        m = build_spl_model(4, NoiseModelSpec("spl_linear_topology", pauli_fidelity=0.99))
        for t in m.product_terms:
            assert t.pauli.weight() in (1, 2)
            sup = t.pauli.support()
            if len(sup) == 2:
                assert sup[1] - sup[0] == 1  # nearest neighbors only


class TestChannelJson:
    def test_dense_round_trip(self):
        ch = invert_dense(depolarizing_channel(0.02, 2))
        back = dense_from_dict(dense_to_dict(ch))
        for p in all_paulis(2):
            assert back.coefficient(p) == pytest.approx(ch.coefficient(p), abs=1e-16)

    def test_spl_round_trip(self):
        m = build_spl_model(3, NoiseModelSpec("spl_linear_topology", pauli_fidelity=0.99))
        m = expand_guided(m.invert(), 8)
        back = spl_from_dict(spl_to_dict(m))
        assert gamma_spl(back) == pytest.approx(gamma_spl(m), rel=1e-15)
