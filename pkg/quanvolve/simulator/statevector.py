"""
Dense statevector simulation for 1 to 16 qubits.

Qubit q is bit q of the amplitude index (qubit 0 is the least significant bit).
"""

import math
from collections import namedtuple
from functools import lru_cache

import numpy as np

from quanvolve.exceptions import ConfigError, DataError, NumericError

MAX_QUBITS = 16
NORM_TOLERANCE = 1e-10

# a gate resolved to its matrix, ready to be applied
BoundGate = namedtuple('BoundGate', ['matrix', 'targets'])


class StateVector(object):
    """
    amplitudes of an n-qubit pure state, owned by whoever is applying gates to it
    """

    __slots__ = ('n_qubits', 'amplitudes')

    def __init__(self, n_qubits, amplitudes):
        """

        :param n_qubits:
        :param amplitudes: 2^n complex values
        """
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << n_qubits,):
            raise DataError('State of %d qubits needs %d amplitudes, got shape %s.'
                            % (n_qubits, 1 << n_qubits, amplitudes.shape))
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    def norm_squared(self):
        """

        :return:
        """
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self):
        """

        :return: |amplitude|^2 per basis state
        """
        return self.amplitudes.real ** 2 + self.amplitudes.imag ** 2

    def copy(self):
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def __repr__(self):
        return 'StateVector(n_qubits=%d)' % self.n_qubits


def _check_n_qubits(n_qubits):
    if isinstance(n_qubits, bool) or not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigError('Number of qubits must be an integer in [1, %d], got %r.' % (MAX_QUBITS, n_qubits))
    return int(n_qubits)


def _check_qubit(state, q):
    if not 0 <= q < state.n_qubits:
        raise ConfigError('Qubit index %d out of range for %d qubits.' % (q, state.n_qubits))


def new_state(n_qubits):
    """
    |0...0> on n_qubits

    :param n_qubits: 1..16
    :return:
    """
    n_qubits = _check_n_qubits(n_qubits)
    amplitudes = np.zeros(1 << n_qubits, dtype=np.complex128)
    amplitudes[0] = 1.0
    return StateVector(n_qubits, amplitudes)


def apply_gate(state, gate, targets):
    """
    applies a one- or two-qubit unitary to the target qubits, identity elsewhere

    :param state:
    :param gate: 2x2 or 4x4 matrix
    :param targets: one or two distinct qubit indices, for two-qubit gates targets[0]
                    is the more significant bit of the gate's local basis
    :return: new StateVector
    """
    targets = tuple(int(t) for t in targets)
    n = state.n_qubits
    for q in targets:
        _check_qubit(state, q)
    if len(set(targets)) != len(targets):
        raise ConfigError('Gate targets must be distinct, got %s.' % (targets,))
    gate = np.asarray(gate, dtype=np.complex128)

    psi = state.amplitudes.reshape((2,) * n)
    # axis 0 of the reshaped tensor is the most significant bit
    axes = [n - 1 - q for q in targets]
    if len(targets) == 1 and gate.shape == (2, 2):
        psi = np.tensordot(gate, psi, axes=([1], axes))
        psi = np.moveaxis(psi, 0, axes[0])
    elif len(targets) == 2 and gate.shape == (4, 4):
        psi = np.tensordot(gate.reshape(2, 2, 2, 2), psi, axes=([2, 3], axes))
        psi = np.moveaxis(psi, [0, 1], axes)
    else:
        raise ConfigError('Gate of shape %s does not match %d target(s).' % (gate.shape, len(targets)))
    return StateVector(n, np.ascontiguousarray(psi).reshape(-1))


def execute(bound_gates, n_qubits):
    """
    runs a bound gate sequence starting from |0...0>

    :param bound_gates: iterable of BoundGate
    :param n_qubits:
    :return: final StateVector
    """
    state = new_state(n_qubits)
    for gate in bound_gates:
        state = apply_gate(state, gate.matrix, gate.targets)
    drift = abs(state.norm_squared() - 1.0)
    if not drift < NORM_TOLERANCE:
        raise NumericError('State norm drifted by %g after %d qubits simulation.' % (drift, n_qubits))
    return state


def embed(gate, targets, n_qubits):
    """
    the full 2^n x 2^n matrix of a gate acting on targets, built entry by entry

    :param gate:
    :param targets:
    :param n_qubits:
    :return:
    """
    index = np.arange(1 << n_qubits)
    local = np.zeros_like(index)
    mask = 0
    for q in targets:
        local = 2 * local + ((index >> q) & 1)
        mask |= 1 << q
    rest = index & ~mask
    gate = np.asarray(gate, dtype=np.complex128)
    return gate[local[:, None], local[None, :]] * (rest[:, None] == rest[None, :])


def full_unitary(bound_gates, n_qubits):
    """
    explicit composition of a bound circuit, meant for tiny circuits and cross checks

    :param bound_gates:
    :param n_qubits:
    :return: 2^n x 2^n unitary
    """
    n_qubits = _check_n_qubits(n_qubits)
    unitary = np.eye(1 << n_qubits, dtype=np.complex128)
    for gate in bound_gates:
        unitary = embed(gate.matrix, gate.targets, n_qubits) @ unitary
    return unitary


@lru_cache(maxsize=None)
def _popcounts(n_qubits):
    """

    :param n_qubits:
    :return: number of set bits of every basis index
    """
    index = np.arange(1 << n_qubits)
    counts = np.zeros(1 << n_qubits, dtype=np.int64)
    for q in range(n_qubits):
        counts += (index >> q) & 1
    counts.setflags(write=False)
    return counts


def prob_one(state, q):
    """
    marginal probability of measuring qubit q in |1>

    :param state:
    :param q:
    :return:
    """
    _check_qubit(state, q)
    index = np.arange(1 << state.n_qubits)
    return float(state.probabilities()[((index >> q) & 1) == 1].sum())


def sample_counts(state, shots, rng):
    """
    draws full-register measurements by inverse CDF over the cumulative probabilities

    :param state:
    :param shots:
    :param rng: numpy Generator
    :return: array of measured basis indices
    """
    if shots < 1:
        raise ConfigError('Number of shots must be at least 1, got %d.' % shots)
    cumulative = np.cumsum(state.probabilities())
    draws = rng.random(shots) * cumulative[-1]
    outcomes = np.searchsorted(cumulative, draws, side='right')
    return np.minimum(outcomes, len(cumulative) - 1)


def decode_fraction_ones(state, mode='analytic', shots=1000, rng=None):
    """
    fraction of qubits found in |1>, exactly in analytic mode or averaged over shots

    :param state:
    :param mode: analytic or sampled
    :param shots:
    :param rng: numpy Generator, required when sampled
    :return: scalar in [0, 1]
    """
    popcounts = _popcounts(state.n_qubits)
    if mode == 'analytic':
        value = float(np.dot(state.probabilities(), popcounts)) / state.n_qubits
        return min(max(value, 0.0), 1.0)
    if mode == 'sampled':
        if rng is None:
            raise ConfigError('Sampled decoding needs a seeded generator.')
        outcomes = sample_counts(state, shots, rng)
        return float(popcounts[outcomes].mean()) / state.n_qubits
    raise ConfigError('Unknown decode mode `%s`.' % mode)


def decode_most_frequent(state, shots=1000, rng=None):
    """
    fraction of ones in the most frequently measured basis state,
    ties go to the lowest basis index

    :param state:
    :param shots: when rng is None the most probable state is used instead of sampling
    :param rng:
    :return:
    """
    if rng is None:
        winner = int(np.argmax(state.probabilities()))
    else:
        outcomes = sample_counts(state, shots, rng)
        winner = int(np.argmax(np.bincount(outcomes, minlength=1 << state.n_qubits)))
    return float(_popcounts(state.n_qubits)[winner]) / state.n_qubits


def z_expectation(state):
    """
    <psi| Z^(x)n |psi>

    :param state:
    :return: scalar in [-1, 1]
    """
    parity = 1 - 2 * (_popcounts(state.n_qubits) & 1)
    return float(np.dot(state.probabilities(), parity))


def fidelity(a, b):
    """
    |<a|b>|^2

    :param a:
    :param b:
    :return:
    """
    if a.n_qubits != b.n_qubits:
        raise ConfigError('Fidelity between %d and %d qubit states.' % (a.n_qubits, b.n_qubits))
    overlap = np.vdot(a.amplitudes, b.amplitudes)
    return min(float(overlap.real ** 2 + overlap.imag ** 2), 1.0)


def decode(state, mode='analytic', shots=1000, rng=None):
    """
    dispatches on the decode mode used by the quanvolutional layer

    :param state:
    :param mode: analytic, sampled or most_frequent
    :param shots:
    :param rng:
    :return:
    """
    if mode == 'most_frequent':
        return decode_most_frequent(state, shots, rng)
    return decode_fraction_ones(state, mode, shots, rng)


def is_normalized(state, tolerance=NORM_TOLERANCE):
    return math.isfinite(state.norm_squared()) and abs(state.norm_squared() - 1.0) < tolerance
