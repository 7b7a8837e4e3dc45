import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supermult.channels import (
    ChannelDescriptor,
    InvalidChannelError,
    KrausChannel,
    RandomUnitaryChannel,
    adjoint_apply,
    apply,
    conjugate,
    identity_channel,
    minimal_kraus,
    random_unitary_channel,
    tensor,
    tensor_output_pure,
    validate,
    werner_holevo,
    werner_holevo_map,
    weyl_channel,
)
from supermult.linalg import (
    DimensionError,
    ResourceError,
    haar_unitary,
    kron,
    projector,
    random_density,
    random_pure_state,
)
from supermult.rng import SeededRng

from conftest import random_kraus_channel


def pauli_basis_states():
    """The four density matrices (I +- X)/2, (I + Y)/2, (I + Z)/2 span all 2x2 matrices."""
    x = np.array([[0, 1], [1, 0]])
    y = np.array([[0, -1j], [1j, 0]])
    z = np.diag([1, -1])
    i2 = np.eye(2)
    return [(i2 + x) / 2, (i2 - x) / 2, (i2 + y) / 2, (i2 + z) / 2]


def test_identity_channel_apply():
    rho = random_density(3, SeededRng(1))
    assert np.allclose(apply(identity_channel(3), rho), rho)


def test_single_unitary_keeps_spectrum():
    v = haar_unitary(4, SeededRng(2))
    ch = RandomUnitaryChannel([v])
    rho = random_density(4, SeededRng(3))
    out = apply(ch, rho)
    assert np.allclose(out, v @ rho @ v.conj().T)
    assert np.allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho))


def test_weyl_qubit_depolarises_spanning_inputs():
    ch = weyl_channel(2)
    for rho in pauli_basis_states():
        assert np.abs(apply(ch, rho) - np.eye(2) / 2).max() <= 1e-10


def test_weyl_qubit_is_pauli_group():
    ops = weyl_channel(2).unitaries
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    for p in paulis:
        # equal up to a global phase
        assert any(abs(abs(np.vdot(p, u)) - 2) < 1e-12 for u in ops)


def test_weyl_qutrit_depolarises_matrix_units():
    ch = weyl_channel(3)
    for i in range(3):
        for j in range(3):
            e = np.zeros((3, 3), dtype=complex)
            e[i, j] = 1
            assert np.abs(ch.apply(e) - (i == j) * np.eye(3) / 3).max() <= 1e-10


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply(identity_channel(2), np.eye(3) / 3)


def test_conjugate_real_channel_unchanged():
    ch = weyl_channel(2)  # X and Z real, XZ real
    real = RandomUnitaryChannel([u for u in ch.unitaries if np.all(np.isreal(u))])
    assert conjugate(real) == real


def test_conjugate_is_involution(haar_channel):
    ch = haar_channel(3, 5, 4)
    assert conjugate(conjugate(ch)) == ch
    assert conjugate(ch) != ch


def test_conjugate_outputs(haar_channel):
    ch = haar_channel(3, 4, 9)
    for i in range(5):
        rho = random_density(3, SeededRng(10, i))
        assert np.abs(conjugate(ch).apply(rho.conj()) - ch.apply(rho).conj()).max() <= 1e-12


def test_adjoint_examples():
    x = random_density(3, SeededRng(1))
    assert np.allclose(adjoint_apply(identity_channel(3), x), x)
    for ch in (random_kraus_channel(3, 4, 0), werner_holevo(4), random_unitary_channel(5, 3, 2)):
        assert np.abs(adjoint_apply(ch, np.eye(ch.dim_out)) - np.eye(ch.dim_in)).max() <= 1e-9


def test_adjoint_duality():
    for i in range(10):
        ch = random_kraus_channel(3, 1 + i % 4, i)
        rho = random_density(3, SeededRng(5, i))
        g = np.random.default_rng(i)
        h = g.standard_normal((3, 3)) + 1j * g.standard_normal((3, 3))
        x = h + h.conj().T
        lhs = np.trace(x @ ch.apply(rho))
        rhs = np.trace(ch.adjoint_apply(x) @ rho)
        assert abs(lhs - rhs) <= 1e-10


def test_adjoint_times_matches_matrix():
    ch = random_kraus_channel(4, 3, 7)
    psi = random_pure_state(4, SeededRng(1))
    x = random_density(4, SeededRng(2))
    assert np.allclose(ch.adjoint_times(x, psi), ch.adjoint_apply(x) @ psi)


def test_tensor_examples():
    assert tensor(identity_channel(2), identity_channel(3)) == RandomUnitaryChannel([np.eye(6)])
    v, w = haar_unitary(2, SeededRng(1)), haar_unitary(3, SeededRng(2))
    assert tensor(RandomUnitaryChannel([v]), RandomUnitaryChannel([w])) == RandomUnitaryChannel([kron(v, w)])


def test_tensor_factorises_on_products():
    for i in range(5):
        n1, n2 = random_kraus_channel(2, 2, i), random_unitary_channel(3, 3, i)
        rho, sigma = random_density(2, SeededRng(1, i)), random_density(3, SeededRng(2, i))
        out = tensor(n1, n2).apply(kron(rho, sigma))
        assert np.abs(out - kron(n1.apply(rho), n2.apply(sigma))).max() <= 1e-10


def test_tensor_kraus_count_law():
    a, b = random_kraus_channel(2, 3, 0), werner_holevo(3)
    assert tensor(a, b).num_kraus == a.num_kraus * b.num_kraus
    assert validate(tensor(a, b)).passed


def test_tensor_resource_guard():
    with pytest.raises(ResourceError):
        tensor(identity_channel(17), identity_channel(16))


def test_conjugate_commutes_with_tensor(haar_channel):
    a, b = haar_channel(2, 3, 1), haar_channel(3, 2, 2)
    assert conjugate(tensor(a, b)) == tensor(conjugate(a), conjugate(b))


def test_tensor_output_pure_matches_materialised():
    a, b = random_unitary_channel(3, 4, 1), werner_holevo(3)
    psi = random_pure_state(9, SeededRng(4))
    assert np.abs(tensor_output_pure(a, b, psi) - tensor(a, b).apply_pure(psi)).max() <= 1e-12


def test_random_unitary_channel_structure_and_determinism():
    ch = random_unitary_channel(2, 1, 3)
    assert ch.n == 1 and ch.dim == 2
    assert random_unitary_channel(4, 8, 5) == random_unitary_channel(4, 8, 5)
    assert random_unitary_channel(4, 8, 5) != random_unitary_channel(4, 8, 6)


def test_random_unitary_channel_preserves_trace_and_psd():
    for i in range(10):
        ch = random_unitary_channel(4, 1 + i, i)
        out = ch.apply(random_density(4, SeededRng(6, i)))
        assert abs(np.trace(out) - 1) <= 1e-10
        assert np.linalg.eigvalsh(out).min() >= -1e-10


def test_weyl_randomises_random_inputs():
    for d in (2, 3, 4):
        ch = weyl_channel(d)
        worst = max(
            d * np.abs(np.linalg.eigvalsh(ch.apply_pure(random_pure_state(d, SeededRng(d, i))) - np.eye(d) / d)).max()
            for i in range(1000)
        )
        assert worst <= 1e-9


def test_werner_holevo_pure_input_closed_form():
    ch = werner_holevo(3)
    for i in range(20):
        psi = random_pure_state(3, SeededRng(12, i))
        out = ch.apply_pure(psi)
        want = (np.eye(3) - projector(psi.conj())) / 2
        assert np.abs(out - want).max() <= 1e-12
        assert np.allclose(np.linalg.eigvalsh(out), [0, 0.5, 0.5], atol=1e-12)


def test_werner_holevo_matches_closed_form_on_mixed_inputs():
    ch = werner_holevo(4)
    rho = random_density(4, SeededRng(1))
    assert np.abs(ch.apply(rho) - werner_holevo_map(rho)).max() <= 1e-12


@pytest.mark.parametrize("d", [3, 4])
def test_werner_holevo_spectrum_input_independent(d):
    ch = werner_holevo(d)
    spectra = [np.linalg.eigvalsh(ch.apply_pure(random_pure_state(d, SeededRng(30, i)))) for i in range(100)]
    assert np.abs(np.array(spectra) - spectra[0]).max() <= 1e-10


def test_werner_holevo_validity_and_domain():
    diag = validate(werner_holevo(3))
    assert diag.passed and diag.tp_residual <= 1e-12
    with pytest.raises(DimensionError):
        werner_holevo(1)


def test_validate_examples():
    assert validate(identity_channel(3)).tp_residual == 0
    bad = validate([np.eye(2) / 2])
    assert not bad.passed
    assert bad.tp_residual == pytest.approx(0.75)
    assert validate(random_unitary_channel(8, 16, 0)).passed


def test_invalid_kraus_rejected():
    with pytest.raises(InvalidChannelError):
        KrausChannel([np.eye(2) / 2])
    with pytest.raises(InvalidChannelError):
        KrausChannel([])


def test_minimal_kraus_same_map():
    ch = random_unitary_channel(3, 40, 2)
    small = minimal_kraus(ch)
    assert small.num_kraus <= 9
    for i in range(5):
        rho = random_density(3, SeededRng(3, i))
        assert np.abs(small.apply(rho) - ch.apply(rho)).max() <= 1e-12


def test_descriptor_parse_and_build():
    d = ChannelDescriptor.parse("wh:3")
    assert d.kind == "werner_holevo" and d.dim == 3
    assert d.build() == werner_holevo(3)
    h = ChannelDescriptor.parse("haar:4:8", default_seed=7)
    assert h.seed == 7 and h.build() == random_unitary_channel(4, 8, 7)
    assert ChannelDescriptor.parse("haar:4:8:2").seed == 2
    for bad in ("haar:4", "wh:3:2", "nope:2", "weyl", "weyl:x"):
        with pytest.raises(ValueError):
            ChannelDescriptor.parse(bad)


def test_descriptor_n_iff_haar():
    with pytest.raises(ValueError):
        ChannelDescriptor("weyl", 3, n=4)
    with pytest.raises(ValueError):
        ChannelDescriptor("random_unitary_haar", 3)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(["random_unitary_haar", "weyl", "werner_holevo", "identity"]),
    st.integers(2, 6),
    st.integers(1, 9),
    st.integers(0, 2**63),
    st.booleans(),
)
def test_descriptor_dict_round_trip(kind, dim, n, seed, conj):
    desc = ChannelDescriptor(
        kind, dim, n=n if kind == "random_unitary_haar" else None,
        seed=seed if kind == "random_unitary_haar" else None, conjugated=conj,
    )
    assert ChannelDescriptor.from_dict(desc.to_dict()) == desc


def test_explicit_kraus_descriptor():
    amp = [np.diag([1, np.sqrt(0.7)]), np.array([[0, np.sqrt(0.3)], [0, 0]])]
    kraus = [[[[z.real, z.imag] for z in row] for row in k.astype(complex)] for k in amp]
    ch = ChannelDescriptor("explicit_kraus", 2, kraus=kraus).build()
    assert validate(ch).passed
    assert np.allclose(ch.kraus[1], amp[1])


def test_conjugated_descriptor_builds_conjugate():
    d = ChannelDescriptor.parse("haar:3:2:5").replace(conjugated=True)
    assert d.build() == conjugate(random_unitary_channel(3, 2, 5))
