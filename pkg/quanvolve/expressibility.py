# -*- coding: utf-8 -*-

"""
Expressibility of a filter: the KL divergence between the fidelity distribution of
pairs of randomly bound states and the fidelity distribution of Haar random states.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from quanvolve.circuits.common import bind
from quanvolve.circuits.handler import build_circuit
from quanvolve.exceptions import ConfigError, NumericError
from quanvolve.simulator.statevector import execute, fidelity
from quanvolve.utils import logger, derive_seed, make_rng, get_config

# grid parameter swept for each family
GRID_PARAMETERS = {
    'integrated': 'gates',
    'rotational': 'p',
    'threshold': 'p',
    'higher_order': 'p',
}


def _check_dim(dim):
    if isinstance(dim, bool) or not isinstance(dim, (int, np.integer)) or dim < 2:
        raise ConfigError('Hilbert space dimension must be an integer >= 2, got %r.' % (dim,))
    return int(dim)


def haar_pdf(F, dim):
    """
    density of the fidelity between two Haar random states

    :param F: fidelity in [0,1], scalar or array
    :param dim: Hilbert space dimension N = 2^n
    :return: (N-1)(1-F)^(N-2)
    """
    dim = _check_dim(dim)
    F = np.asarray(F, dtype=np.float64)
    if np.any(F < 0.0) or np.any(F > 1.0):
        raise ConfigError('Fidelity outside [0, 1].')
    density = (dim - 1) * np.power(1.0 - F, dim - 2)
    return float(density) if density.ndim == 0 else density


def haar_bin_probabilities(dim, bins):
    """
    exact probability of each of `bins` equal intervals of [0,1] under the Haar law,
    from the cumulative distribution 1 - (1-F)^(N-1)

    :param dim:
    :param bins:
    :return: array of bin probabilities summing to 1
    """
    dim = _check_dim(dim)
    if bins < 1:
        raise ConfigError('Number of bins must be >= 1, got %d.' % bins)
    edges = np.linspace(0.0, 1.0, bins + 1)
    survival = np.power(1.0 - edges, dim - 1)
    return survival[:-1] - survival[1:]


def sample_haar_fidelities(dim, n, rng):
    """
    inverse CDF sampling of the Haar fidelity law, F = 1 - (1-u)^(1/(N-1))

    :param dim:
    :param n:
    :param rng: numpy Generator
    :return:
    """
    dim = _check_dim(dim)
    u = rng.random(n)
    return 1.0 - np.power(1.0 - u, 1.0 / (dim - 1))


def fidelity_histogram(fidelities, bins):
    """
    counts in `bins` equal intervals of [0,1], the last interval is closed so F=1 is counted

    :param fidelities:
    :param bins:
    :return: int array of counts
    """
    fidelities = np.asarray(fidelities, dtype=np.float64)
    counts, _ = np.histogram(np.clip(fidelities, 0.0, 1.0), bins=bins, range=(0.0, 1.0))
    return counts


def expr_from_fidelities(fidelities, dim, bins=None, eps=None):
    """
    sum_i P(i) log(P(i)/(Q(i)+eps)) over bins with P(i) > 0, P the normalized histogram
    and Q the Haar bin probabilities

    :param fidelities:
    :param dim: Hilbert space dimension of the sampled states
    :param bins: EXPR_BINS by default
    :param eps: EXPR_EPSILON by default
    :return: (expr, expr_prime = -ln(expr)); expr_prime is inf when expr <= 0
    """
    bins = int(get_config('EXPR_BINS', 50)) if bins is None else bins
    eps = float(get_config('EXPR_EPSILON', 1e-16)) if eps is None else eps
    fidelities = np.asarray(fidelities, dtype=np.float64)
    if fidelities.size == 0:
        raise ConfigError('Expressibility needs at least one fidelity.')
    if not np.all(np.isfinite(fidelities)):
        raise NumericError('Non-finite fidelity in the sample.')

    counts = fidelity_histogram(fidelities, bins)
    P = counts / float(counts.sum())
    Q = haar_bin_probabilities(dim, bins)
    occupied = P > 0
    expr = float(np.sum(P[occupied] * np.log(P[occupied] / (Q[occupied] + eps))))
    expr_prime = -math.log(expr) if expr > 0 else math.inf
    return expr, expr_prime


def _random_inputs(circuit, rng):
    """ uniform inputs in [0,1], binary for the threshold encoding """
    if circuit.family == 'threshold':
        return rng.integers(0, 2, circuit.n_features).astype(np.float64)
    return rng.random(circuit.n_features)


def sample_fidelities(circuit, n_pairs, rng):
    """
    fidelities |<psi(x1)|psi(x2)>|^2 of the same circuit bound to pairs of random inputs

    :param circuit: CircuitSpec, kept fixed for every pair
    :param n_pairs:
    :param rng: numpy Generator
    :return: array of n_pairs fidelities
    """
    if n_pairs < 1:
        raise ConfigError('Number of fidelity pairs must be >= 1, got %d.' % n_pairs)
    fidelities = np.empty(n_pairs, dtype=np.float64)
    for i in range(n_pairs):
        first = execute(bind(circuit, _random_inputs(circuit, rng)), circuit.n_qubits)
        second = execute(bind(circuit, _random_inputs(circuit, rng)), circuit.n_qubits)
        fidelities[i] = fidelity(first, second)
    return fidelities


@dataclass
class ExprReport:
    family: str
    k: int
    n_qubits: int
    alpha: Optional[str]
    grid: str
    value: float
    pairs: int
    bins: int
    expr: List[float] = field(default_factory=list)
    expr_prime: List[float] = field(default_factory=list)

    @property
    def repeats(self):
        return len(self.expr_prime)

    @property
    def mean_expr_prime(self):
        return float(np.mean(self.expr_prime))

    @property
    def std_expr_prime(self):
        """
        sample standard deviation over repeats, 0 for a single repeat
        """
        if len(self.expr_prime) < 2:
            return 0.0
        return float(np.std(self.expr_prime, ddof=1))

    def toJSON(self):
        """
        :return: values formatted as python dict
        """
        return {
            'family': self.family,
            'k': self.k,
            'n_qubits': self.n_qubits,
            'alpha': self.alpha,
            'grid': self.grid,
            'value': self.value,
            'repeats': self.repeats,
            'pairs': self.pairs,
            'bins': self.bins,
            'mean_expr_prime': self.mean_expr_prime,
            'std_expr_prime': self.std_expr_prime,
        }


def build_template(family, k, value, seed, n_qubits=None, alpha='simple'):
    """
    the circuit of one repeat at one grid point; integrated circuits sweep the number of gates,
    the encoders are followed by a processing circuit and sweep its two-qubit probability

    :param family:
    :param k:
    :param value: grid value
    :param seed:
    :param n_qubits:
    :param alpha:
    :return: CircuitSpec
    """
    if family not in GRID_PARAMETERS:
        raise ConfigError('No expressibility sweep for family `%s`.' % family)
    if family == 'integrated':
        return build_circuit('integrated', k, seed=seed, n_qubits=n_qubits, L=int(value), alpha=alpha)
    return build_circuit(family, k, seed=seed, p=float(value), processing='henderson')


def expressibility_repeat(family, k, value, repeat, seed, n_pairs, bins=None, eps=None, n_qubits=None,
                          alpha='simple'):
    """
    one freshly generated circuit at one grid point

    :return: (expr, expr_prime)
    """
    circuit = build_template(family, k, value, derive_seed(seed, 'circuit', family, value, repeat),
                             n_qubits=n_qubits, alpha=alpha)
    rng = make_rng(derive_seed(seed, 'pairs', family, value, repeat))
    fidelities = sample_fidelities(circuit, n_pairs, rng)
    return expr_from_fidelities(fidelities, 1 << circuit.n_qubits, bins, eps)


def expr_sweep(family, grid, k, seed, repeats=None, n_pairs=None, bins=None, eps=None, n_qubits=None,
               alpha='simple'):
    """
    mean and spread of expr' over `repeats` differently initialized circuits, per grid value

    :param family: integrated (grid over the number of gates) or an encoder (grid over p)
    :param grid: list of grid values
    :param k:
    :param seed: master seed
    :param repeats: EXPR_REPEATS by default
    :param n_pairs: EXPR_PAIRS by default
    :param bins:
    :param eps:
    :param n_qubits: integrated only
    :param alpha: integrated only
    :return: list of ExprReport
    """
    repeats = int(get_config('EXPR_REPEATS', 10)) if repeats is None else repeats
    n_pairs = int(get_config('EXPR_PAIRS', 1024)) if n_pairs is None else n_pairs
    bins = int(get_config('EXPR_BINS', 50)) if bins is None else bins
    if repeats < 1:
        raise ConfigError('Number of repeats must be >= 1, got %d.' % repeats)
    if family == 'integrated' and n_qubits is None:
        n_qubits = int(get_config('N_QUBITS', 4))

    reports = []
    for value in grid:
        report = ExprReport(family=family, k=k, n_qubits=n_qubits if family == 'integrated' else k * k,
                            alpha=alpha if family == 'integrated' else None,
                            grid=GRID_PARAMETERS.get(family, ''), value=value, pairs=n_pairs, bins=bins)
        for repeat in range(repeats):
            expr, expr_prime = expressibility_repeat(family, k, value, repeat, seed, n_pairs, bins, eps,
                                                     n_qubits, alpha)
            report.expr.append(expr)
            report.expr_prime.append(expr_prime)
        logger.info("Expressibility of %s k=%d at %s=%s: expr'=%.4f +/- %.4f over %d repeats."
                    % (family, k, report.grid, value, report.mean_expr_prime, report.std_expr_prime, repeats))
        reports.append(report)
    return reports


REPORT_COLUMNS = ['family', 'k', 'n_qubits', 'alpha', 'grid', 'value', 'repeats', 'pairs', 'bins',
                  'mean_expr_prime', 'std_expr_prime', 'expr_prime_values']


def write_expr_report(reports, filename):
    """

    :param reports: list of ExprReport
    :param filename: csv output
    :return:
    """
    with open(filename, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for report in reports:
            row = report.toJSON()
            row['expr_prime_values'] = ';'.join(repr(v) for v in report.expr_prime)
            writer.writerow(row)
