# -*- coding: utf-8 -*-

from quanvolve.circuits.common import compose
from quanvolve.circuits.rotational import rotational_encoder
from quanvolve.circuits.threshold import threshold_encoder
from quanvolve.circuits.higher_order import higher_order_encoder
from quanvolve.circuits.henderson import henderson_processing, to_generator
from quanvolve.circuits.integrated import integrated_circuit
from quanvolve.exceptions import ConfigError
from quanvolve.utils import derive_seed, get_config, logger

ENCODERS = {
    'rotational': rotational_encoder,
    'threshold': threshold_encoder,
    'higher_order': higher_order_encoder,
}


def verify(family):
    """

    :param family:
    :return: the builder of the family, None if unknown
    """
    if family in ENCODERS:
        return ENCODERS[family]
    if family == 'henderson':
        return henderson_processing
    if family == 'integrated':
        return integrated_circuit
    return None


def build_circuit(family, k, seed=0, n_qubits=None, L=None, alpha='simple', p=None, processing=None):
    """
    builds one filter of the given family

    :param family: rotational, threshold, higher_order, henderson or integrated
    :param k: kernel size
    :param seed: seeds the random families and the appended processing circuit
    :param n_qubits: integrated only, N_QUBITS by default
    :param L: integrated only, 2k^2 by default
    :param alpha: integrated only, mapping function kind
    :param p: two-qubit gate probability of henderson circuits, HENDERSON_PROBABILITY by default
    :param processing: None or henderson, appended to the encoders
    :return: CircuitSpec
    """
    builder = verify(family)
    if builder is None:
        raise ConfigError('Unknown circuit family `%s`.' % family)
    if p is None:
        p = float(get_config('HENDERSON_PROBABILITY', 0.15))

    if family == 'integrated':
        if processing is not None:
            raise ConfigError('Integrated circuits carry no processing circuit.')
        n_qubits = int(get_config('N_QUBITS', 4)) if n_qubits is None else n_qubits
        L = 2 * k * k if L is None else L
        return integrated_circuit(k, n_qubits, L, alpha, seed)
    if family == 'henderson':
        return henderson_processing(k, p, seed)

    encoder = builder(k)
    if processing is None:
        return encoder
    if processing != 'henderson':
        raise ConfigError('Unknown processing `%s`.' % processing)
    return compose(encoder, henderson_processing(k, p, seed))


def generate_filter_bank(family, count, seed, **params):
    """
    count filters of one family, filter i seeded with a child seed of the master seed

    :param family:
    :param count:
    :param seed: master seed
    :param params: passed on to build_circuit
    :return: list of CircuitSpec
    """
    if count < 1:
        raise ConfigError('Filter bank needs at least one filter, got %d.' % count)
    to_generator(seed)
    bank = [build_circuit(family, seed=derive_seed(seed, 'filter', i), **params) for i in range(count)]
    logger.debug('Generated %d %s filters from master seed %s.' % (count, family, seed))
    return bank
