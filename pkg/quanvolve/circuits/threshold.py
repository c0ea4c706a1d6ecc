# -*- coding: utf-8 -*-

from quanvolve.circuits.common import CircuitSpec, GateOp, FIXED1Q
from quanvolve.circuits.rotational import check_kernel_size


def threshold_encoder(k):
    """
    binarized pixels: X on qubit i when x_i is 1, nothing when it is 0

    :param k: kernel size
    :return: CircuitSpec on k^2 qubits
    """
    k = check_kernel_size(k)
    gates = tuple(GateOp(kind=FIXED1Q, targets=(i,), name='X', condition=i) for i in range(k * k))
    return CircuitSpec(family='threshold', n_qubits=k * k, k=k, gates=gates, seed=0)
