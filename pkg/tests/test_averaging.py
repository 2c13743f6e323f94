"""Tests for the splitter-tree encoder/decoder around parallel gate copies.

The load-bearing identity: with copies U_1 .. U_N between the trees, the block
of the assembled interferometer that maps the input rails to the rails of copy
k is the signed average (1/N) sum_j (-1)^{popcount(k & j)} U_j.  Everything
else (postselection, herald analysis, noise injection) builds on that.
"""

import math

import numpy as np
import pytest

from uasim.averaging import (
    AveragingConfig,
    EncodedCircuit,
    EncoderNoise,
    averaged_operator,
    build_tree,
    encoder_error_scaling,
    fidelity_vs_target,
    herald_branch,
    herald_weights,
    heralded_operator,
    num_splitter_deltas,
    run_postselected,
    success_branch,
)
from uasim.fock import PhotonicState, is_unitary
from uasim.gates import named_gate, single_qubit_matrix

RNG = np.random.default_rng(77)


def random_unitary(d, rng=RNG):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def gate(name, alpha=None):
    return single_qubit_matrix(named_gate(name, alpha))


# ---------------------------------------------------------------------------
# herald weights
# ---------------------------------------------------------------------------


def test_herald_weights_success_row_is_flat():
    for n in range(4):
        np.testing.assert_array_equal(herald_weights(n, 0), np.ones(1 << n))


def test_herald_weights_frozen_example():
    np.testing.assert_array_equal(herald_weights(2, 3), [1, -1, -1, 1])
    np.testing.assert_array_equal(herald_weights(2, 1), [1, -1, 1, -1])


def test_herald_weight_rows_are_orthogonal():
    n = 3
    rows = np.array([herald_weights(n, k) for k in range(1 << n)])
    np.testing.assert_array_equal(rows @ rows.T, (1 << n) * np.eye(1 << n))


def test_averaged_operator_is_plain_mean():
    mats = [random_unitary(2) for _ in range(4)]
    np.testing.assert_allclose(averaged_operator(mats), sum(mats) / 4)
    np.testing.assert_allclose(heralded_operator(mats, 0), averaged_operator(mats))


# ---------------------------------------------------------------------------
# tree assembly
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tree_blocks_are_signed_averages(n):
    N = 1 << n
    mats = [random_unitary(2) for _ in range(N)]
    circ = build_tree(mats)
    assert is_unitary(circ.matrix, tol=1e-12)
    for k in range(N):
        np.testing.assert_allclose(
            herald_branch(circ, k), heralded_operator(mats, k), atol=1e-12
        )


def test_branch_norms_sum_to_one():
    """Parseval: the herald branches split every input's probability."""
    mats = [random_unitary(2) for _ in range(8)]
    circ = build_tree(mats)
    psi = np.array([0.6, 0.8j])
    total = sum(np.linalg.norm(herald_branch(circ, k) @ psi) ** 2 for k in range(8))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_single_copy_tree_is_the_gate_itself():
    u = random_unitary(2)
    circ = build_tree([u])
    np.testing.assert_array_equal(circ.matrix, u)
    assert circ.splitter_layers == 0
    assert circ.error_modes == ()


@pytest.mark.parametrize("num_copies, layers", [(2, 2), (4, 4), (8, 6)])
def test_splitter_layer_count(num_copies, layers):
    circ = build_tree([np.eye(2)] * num_copies)
    assert circ.splitter_layers == layers
    assert AveragingConfig(num_copies).num_layers == layers // 2


def test_mode_bookkeeping():
    circ = EncodedCircuit(np.eye(8), num_copies=4, rails=2)
    assert circ.success_modes == (0, 1)
    assert circ.error_modes == (2, 3, 4, 5, 6, 7)


def test_identical_copies_average_to_the_gate():
    """Zero noise: N identical unitaries give back the gate with certainty."""
    u = gate("H")
    for N in (2, 4, 8):
        circ = build_tree([u] * N)
        np.testing.assert_allclose(success_branch(circ), u, atol=1e-12)
        state, ps = run_postselected(circ, PhotonicState.single_photon(0, 2 * N))
        assert ps == pytest.approx(1.0, abs=1e-12)
        expected = PhotonicState(2 * N, {(0,): u[0, 0], (1,): u[1, 0]})
        assert fidelity_vs_target(state, expected) == pytest.approx(1.0, abs=1e-12)


def test_two_distinct_copies_worked_example():
    """[1, X]: the success branch projects onto the X = +1 sector."""
    circ = build_tree([gate("I"), gate("X")])
    np.testing.assert_allclose(success_branch(circ), 0.5 * np.ones((2, 2)), atol=1e-14)

    state, ps = run_postselected(circ, PhotonicState.single_photon(0, 4))
    assert ps == pytest.approx(0.5)
    plus = PhotonicState(4, {(0,): 1 / math.sqrt(2), (1,): 1 / math.sqrt(2)})
    assert fidelity_vs_target(state, plus) == pytest.approx(1.0)

    # the heralded branch carries the orthogonal conditional state
    np.testing.assert_allclose(
        herald_branch(circ, 1), 0.5 * np.array([[1, -1], [-1, 1]]), atol=1e-14
    )


def test_phase_pair_worked_example():
    """[1, Z]: averaging keeps only the |0> rail of a |+> input."""
    circ = build_tree([gate("I"), gate("Z", 0.0)])
    plus = PhotonicState(4, {(0,): 1 / math.sqrt(2), (1,): 1 / math.sqrt(2)})
    state, ps = run_postselected(circ, plus)
    assert ps == pytest.approx(0.5)
    assert abs(state.amplitude((0,))) == pytest.approx(1.0)


def test_near_certain_herald_keeps_only_float_residue():
    """|-> through [1, X] heralds almost surely; the success weight is rounding."""
    circ = build_tree([gate("I"), gate("X")])
    minus = PhotonicState(4, {(0,): 1 / math.sqrt(2), (1,): -1 / math.sqrt(2)})
    _, ps = run_postselected(circ, minus)
    assert ps < 1e-30


def test_total_herald_returns_no_state():
    # a circuit that routes the input rails straight into the herald modes
    perm = np.zeros((4, 4))
    perm[2, 0] = perm[3, 1] = perm[0, 2] = perm[1, 3] = 1.0
    circ = EncodedCircuit(perm, num_copies=2, rails=2)
    state, ps = run_postselected(circ, PhotonicState.single_photon(0, 4))
    assert state is None
    assert ps == 0.0


def test_two_photon_transmission_through_the_tree():
    """A photon pair rides the same averaged operator, entry by entry."""
    u = gate("H")
    circ = build_tree([u] * 4)
    pair = PhotonicState.two_photon(0, 1, 8)
    state, ps = run_postselected(circ, pair)
    assert ps == pytest.approx(1.0, abs=1e-12)
    # H on a†_0 a†_1 gives (a†_0^2 - a†_1^2)/2
    assert abs(state.amplitude((0, 0))) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert abs(state.amplitude((1, 1))) == pytest.approx(1 / math.sqrt(2), abs=1e-12)


# ---------------------------------------------------------------------------
# splitter noise injection
# ---------------------------------------------------------------------------


def test_delta_count_bookkeeping():
    assert num_splitter_deltas(8, 2, True) == 12
    assert num_splitter_deltas(8, 2, False) == 24
    assert num_splitter_deltas(2, 2, True) == 1
    assert num_splitter_deltas(1, 2, True) == 0


def test_injected_delta_sizes_are_validated():
    mats = [np.eye(2)] * 4
    with pytest.raises(ValueError, match="deltas per side"):
        build_tree(mats, encoder_deltas=np.zeros(3))
    with pytest.raises(ValueError, match="match in size"):
        build_tree(mats, encoder_deltas=np.zeros(4), decoder_deltas=np.zeros(8))
    with pytest.raises(ValueError, match="not both"):
        build_tree(
            mats,
            encoder_noise=EncoderNoise(1e-6),
            rng=np.random.default_rng(0),
            encoder_deltas=np.zeros(4),
        )
    with pytest.raises(ValueError, match="rng"):
        build_tree(mats, encoder_noise=EncoderNoise(1e-6))


def test_gate_list_validation():
    with pytest.raises(ValueError, match="power-of-two"):
        build_tree([np.eye(2)] * 3)
    with pytest.raises(ValueError, match="square"):
        build_tree([np.eye(2), np.eye(3)])


def test_correlated_deltas_equal_duplicated_independent_ones():
    mats = [random_unitary(2) for _ in range(4)]
    corr = RNG.normal(scale=1e-2, size=num_splitter_deltas(4, 2, True))
    indep = np.repeat(corr, 2)  # same offset on both rails of each pair
    a = build_tree(mats, encoder_deltas=corr, decoder_deltas=corr)
    b = build_tree(mats, encoder_deltas=indep, decoder_deltas=indep)
    np.testing.assert_allclose(a.matrix, b.matrix, atol=1e-15)


def test_noisy_tree_is_still_unitary():
    mats = [random_unitary(2) for _ in range(8)]
    circ = build_tree(
        mats, encoder_noise=EncoderNoise(1e-4, correlated=False), rng=np.random.default_rng(9)
    )
    assert is_unitary(circ.matrix, tol=1e-10)


def test_sampled_zero_variance_matches_ideal_tree():
    mats = [random_unitary(2) for _ in range(4)]
    noisy = build_tree(mats, encoder_noise=EncoderNoise(0.0), rng=np.random.default_rng(1))
    np.testing.assert_array_equal(noisy.matrix, build_tree(mats).matrix)


@pytest.mark.parametrize("num_copies", [2, 4])
def test_encoder_offsets_enter_only_at_second_order(num_copies):
    """Success-branch error under a frozen offset pattern scales as the square.

    Identical copies are essential here: the gate layer then commutes with the
    copy-space trees and every splitter sits at a stationary point.  Distinct
    copies break that cancellation and the deviation becomes linear.
    """
    u = random_unitary(2)
    scales = [1e-3, 1e-4, 1e-5]
    devs = encoder_error_scaling([u] * num_copies, scales, pattern_seed=3)
    slopes = np.diff(np.log(devs)) / np.diff(np.log(scales))
    assert np.all(np.abs(slopes - 2.0) < 0.05)

    # and with distinct copies the first order genuinely survives
    mixed = [random_unitary(2) for _ in range(num_copies)]
    devs = encoder_error_scaling(mixed, scales, pattern_seed=3)
    slopes = np.diff(np.log(devs)) / np.diff(np.log(scales))
    assert np.all(np.abs(slopes - 1.0) < 0.05)
