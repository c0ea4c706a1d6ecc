# -*- coding: utf-8 -*-

from itertools import combinations
from numbers import Integral

from quanvolve.circuits.common import CircuitSpec, GateOp, Feature, MappingFn, MAPPING_KINDS, PAULIEXP2Q
from quanvolve.circuits.henderson import to_generator
from quanvolve.circuits.rotational import check_kernel_size
from quanvolve.exceptions import ConfigError

PAULI_LABELS = ('I', 'X', 'Y', 'Z')


def make_mapping(kind, rng):
    """
    beta and sigma are always drawn so the generator advances the same way
    for every mapping kind, unused ones are stored as 0

    :param kind:
    :param rng:
    :return:
    """
    beta, sigma = float(rng.random()), float(rng.random())
    if kind == 'simple':
        return MappingFn('simple')
    if kind == 'rndmul':
        return MappingFn('rndmul', beta=beta)
    return MappingFn('rndlin', beta=beta, sigma=sigma)


def integrated_circuit(k, n_qubits, L, alpha, rng):
    """
    L gates exp(-i alpha(x_i) sigma1 (x) sigma2) on random qubit pairs; the first k^2 gates
    take the features in a random order so that every feature is encoded at least once

    :param k: kernel size
    :param n_qubits: at least 2, independent of k
    :param L: number of gates, at least k^2
    :param alpha: simple, rndmul or rndlin
    :param rng: seed or numpy Generator
    :return: CircuitSpec
    """
    k = check_kernel_size(k)
    if isinstance(n_qubits, bool) or not isinstance(n_qubits, Integral) or n_qubits < 2:
        raise ConfigError('Integrated circuits need at least 2 qubits, got %r.' % (n_qubits,))
    if isinstance(L, bool) or not isinstance(L, Integral) or L < k * k:
        raise ConfigError('L=%r, L >= k^2=%d to encode all the features.' % (L, k * k))
    if alpha not in MAPPING_KINDS:
        raise ConfigError('Unknown mapping function `%s`, expected one of %s.' % (alpha, ', '.join(MAPPING_KINDS)))
    n_qubits, L = int(n_qubits), int(L)
    rng, seed = to_generator(rng)

    n_features = k * k
    pairs = list(combinations(range(n_qubits), 2))
    features = list(rng.permutation(n_features)) + list(rng.integers(0, n_features, L - n_features))

    gates = []
    for feature in features:
        sigmas = (PAULI_LABELS[int(rng.integers(4))], PAULI_LABELS[int(rng.integers(4))])
        targets = pairs[int(rng.integers(len(pairs)))]
        angle = Feature(int(feature), make_mapping(alpha, rng))
        gates.append(GateOp(kind=PAULIEXP2Q, targets=targets, sigmas=sigmas, angle=angle))
    return CircuitSpec(family='integrated', n_qubits=n_qubits, k=k, gates=tuple(gates), seed=seed)
