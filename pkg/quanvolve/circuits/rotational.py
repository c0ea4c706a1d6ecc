# -*- coding: utf-8 -*-

from numbers import Integral

from quanvolve.circuits.common import CircuitSpec, GateOp, Feature, MappingFn, ROT1Q
from quanvolve.exceptions import ConfigError


def check_kernel_size(k):
    """
    numpy integers are accepted, the kernel size comes back as a plain int
    """
    if isinstance(k, bool) or not isinstance(k, Integral) or k < 1:
        raise ConfigError('Kernel size must be a positive integer, got %r.' % (k,))
    return int(k)


def encoding_gates(k):
    """
    RX(pi x_i) on qubit i, for every pixel of the patch

    :param k:
    :return:
    """
    return tuple(GateOp(kind=ROT1Q, targets=(i,), axis='X', angle=Feature(i, MappingFn('simple')))
                 for i in range(k * k))


def rotational_encoder(k):
    """
    one qubit per pixel, each rotated around X by its pixel value times pi

    :param k: kernel size
    :return: CircuitSpec on k^2 qubits
    """
    k = check_kernel_size(k)
    return CircuitSpec(family='rotational', n_qubits=k * k, k=k, gates=encoding_gates(k), seed=0)
