"""
Closed-form gate matrices.

Two-qubit matrices are written in the local basis |t0 t1> of the target pair
(targets[0], targets[1]), with targets[0] the more significant bit.
"""

import math

import numpy as np

from quanvolve.exceptions import ConfigError

PAULI = {
    'I': np.array([[1, 0], [0, 1]], dtype=np.complex128),
    'X': np.array([[0, 1], [1, 0]], dtype=np.complex128),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    'Z': np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

FIXED_1Q = {
    'S': np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    'T': np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=np.complex128),
    'H': np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2),
    'X': PAULI['X'],
}

FIXED_2Q = {
    'CNOT': np.array([[1, 0, 0, 0],
                      [0, 1, 0, 0],
                      [0, 0, 0, 1],
                      [0, 0, 1, 0]], dtype=np.complex128),
    'SWAP': np.array([[1, 0, 0, 0],
                      [0, 0, 1, 0],
                      [0, 1, 0, 0],
                      [0, 0, 0, 1]], dtype=np.complex128),
    'SQRT_SWAP': np.array([[1, 0, 0, 0],
                           [0, (1 + 1j) / 2, (1 - 1j) / 2, 0],
                           [0, (1 - 1j) / 2, (1 + 1j) / 2, 0],
                           [0, 0, 0, 1]], dtype=np.complex128),
}

# read-only so that a bound gate can hand the same matrix to every caller
for _matrix in list(PAULI.values()) + list(FIXED_1Q.values()) + list(FIXED_2Q.values()):
    _matrix.setflags(write=False)

PAULI_PRODUCTS = dict(((a, b), np.kron(PAULI[a], PAULI[b])) for a in PAULI for b in PAULI)


def _check_angle(theta):
    theta = float(theta)
    if not math.isfinite(theta):
        raise ConfigError('Rotation angle must be finite, got %r.' % theta)
    return theta


def rx_gate(theta):
    """
    R_X(theta) = [[cos(theta/2), -i sin(theta/2)], [-i sin(theta/2), cos(theta/2)]]

    :param theta: radians
    :return: 2x2 unitary
    """
    theta = _check_angle(theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def ry_gate(theta):
    """

    :param theta: radians
    :return: 2x2 unitary
    """
    theta = _check_angle(theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz_gate(theta):
    """

    :param theta: radians
    :return: 2x2 unitary
    """
    theta = _check_angle(theta)
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=np.complex128)


ROTATIONS = {'X': rx_gate, 'Y': ry_gate, 'Z': rz_gate}


def rotation_gate(axis, theta):
    """

    :param axis: X, Y or Z
    :param theta:
    :return:
    """
    try:
        return ROTATIONS[axis](theta)
    except KeyError:
        raise ConfigError('Unknown rotation axis `%s`.' % axis)


def pauli_exp_gate(theta, sigma1, sigma2):
    """
    exp(-i theta sigma1 (x) sigma2) in closed form, cos(theta) I - i sin(theta) sigma1 (x) sigma2,
    which holds because the tensor product of two Pauli matrices squares to the identity

    :param theta: radians
    :param sigma1: I, X, Y or Z, acts on targets[0]
    :param sigma2: I, X, Y or Z, acts on targets[1]
    :return: 4x4 unitary
    """
    theta = _check_angle(theta)
    try:
        product = PAULI_PRODUCTS[(sigma1, sigma2)]
    except KeyError:
        raise ConfigError('Invalid Pauli label pair (%r, %r).' % (sigma1, sigma2))
    return math.cos(theta) * np.eye(4, dtype=np.complex128) - 1j * math.sin(theta) * product


def fixed_gate(name):
    """

    :param name: one of S, T, H, X, CNOT, SWAP, SQRT_SWAP
    :return: the gate matrix
    """
    if name in FIXED_1Q:
        return FIXED_1Q[name]
    if name in FIXED_2Q:
        return FIXED_2Q[name]
    raise ConfigError('Unknown fixed gate `%s`.' % name)
