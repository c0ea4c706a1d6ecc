# -*- coding: utf-8 -*-

from itertools import combinations
from math import pi

from quanvolve.circuits.common import CircuitSpec, GateOp, Product, PAULIEXP2Q
from quanvolve.circuits.rotational import check_kernel_size, encoding_gates
from quanvolve.utils import get_config


def higher_order_encoder(k, scale=None):
    """
    rotational encoding followed by a ZZ coupling exp(-i scale x_i x_j Z(x)Z)
    for every pair i < j

    :param k: kernel size
    :param scale: coupling scale, HIGHER_ORDER_SCALE (pi^2) by default
    :return: CircuitSpec on k^2 qubits, k^2 + k^2(k^2-1)/2 gates
    """
    k = check_kernel_size(k)
    if scale is None:
        scale = float(get_config('HIGHER_ORDER_SCALE', pi ** 2))
    couplings = tuple(GateOp(kind=PAULIEXP2Q, targets=(i, j), sigmas=('Z', 'Z'), angle=Product((i, j), scale))
                      for i, j in combinations(range(k * k), 2))
    return CircuitSpec(family='higher_order', n_qubits=k * k, k=k, gates=encoding_gates(k) + couplings, seed=0)
