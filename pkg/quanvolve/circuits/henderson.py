# -*- coding: utf-8 -*-

"""
Random processing circuits: a random number of single-qubit gates, probabilistic
two-qubit gates between every pair of qubits, all shuffled together.
"""

import math
from itertools import combinations
from numbers import Real

import numpy as np

from quanvolve.circuits.common import CircuitSpec, GateOp, Constant, FIXED1Q, ROT1Q, FIXED2Q
from quanvolve.circuits.rotational import check_kernel_size
from quanvolve.exceptions import ConfigError

SINGLE_QUBIT_CHOICES = ('RX', 'RY', 'RZ', 'S', 'T', 'H')
TWO_QUBIT_CHOICES = ('CNOT', 'SWAP', 'SQRT_SWAP')
ANGLE_RANGE = 2 * math.pi


def to_generator(rng):
    """
    accepts either an integer seed or an already seeded generator

    :param rng:
    :return: (generator, seed recorded in the CircuitSpec)
    """
    if isinstance(rng, np.random.Generator):
        return rng, None
    if isinstance(rng, bool) or not isinstance(rng, (int, np.integer)) or not 0 <= rng < 2 ** 64:
        raise ConfigError('Seed must be a 64-bit unsigned integer, got %r.' % (rng,))
    return np.random.default_rng(int(rng)), int(rng)


def draw_single_qubit_count(k, rng):
    """
    at most 2k^2 single-qubit gates, drawn uniformly in {1, ..., 2k^2}

    :param k:
    :param rng:
    :return:
    """
    return int(rng.integers(1, 2 * k * k + 1))


def henderson_processing(k, p, rng):
    """

    :param k: kernel size, the circuit acts on k^2 qubits
    :param p: probability of a two-qubit gate between any pair of qubits
    :param rng: seed or numpy Generator
    :return: CircuitSpec
    """
    k = check_kernel_size(k)
    if isinstance(p, bool) or not isinstance(p, Real) or not 0.0 <= p <= 1.0:
        raise ConfigError('Two-qubit gate probability must be in [0, 1], got %r.' % (p,))
    rng, seed = to_generator(rng)
    n_qubits = k * k

    gates = []
    for _ in range(draw_single_qubit_count(k, rng)):
        name = SINGLE_QUBIT_CHOICES[int(rng.integers(len(SINGLE_QUBIT_CHOICES)))]
        target = (int(rng.integers(n_qubits)),)
        if name.startswith('R'):
            angle = Constant(float(rng.uniform(0.0, ANGLE_RANGE)))
            gates.append(GateOp(kind=ROT1Q, targets=target, axis=name[1], angle=angle))
        else:
            gates.append(GateOp(kind=FIXED1Q, targets=target, name=name))

    for i, j in combinations(range(n_qubits), 2):
        if rng.random() < p:
            name = TWO_QUBIT_CHOICES[int(rng.integers(len(TWO_QUBIT_CHOICES)))]
            targets = (i, j) if rng.random() < 0.5 else (j, i)
            gates.append(GateOp(kind=FIXED2Q, targets=targets, name=name))

    order = rng.permutation(len(gates))
    return CircuitSpec(family='henderson', n_qubits=n_qubits, k=k,
                       gates=tuple(gates[i] for i in order), seed=seed, processing='henderson')
