import sys, os
project_home = os.path.abspath(os.path.join(os.path.dirname(__file__), '../../../'))
if project_home not in sys.path:
    sys.path.insert(0, project_home)

import csv
import math
import shutil
import tempfile
import unittest

import numpy as np
from scipy import integrate
from scipy.stats import spearmanr

from quanvolve.exceptions import ConfigError, NumericError
from quanvolve.expressibility import haar_pdf, haar_bin_probabilities, sample_haar_fidelities, \
    fidelity_histogram, expr_from_fidelities, sample_fidelities, ExprReport, build_template, \
    expressibility_repeat, expr_sweep, write_expr_report
from quanvolve.simulator.statevector import StateVector, fidelity


def haar_state(n_qubits, rng):
    amplitudes = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return StateVector(n_qubits, amplitudes / np.linalg.norm(amplitudes))


class test_haar(unittest.TestCase):

    def test_pdf_normalized(self):
        for dim in [2, 4, 16, 256]:
            total, _ = integrate.quad(lambda F: haar_pdf(F, dim), 0.0, 1.0)
            self.assertAlmostEqual(total, 1.0, places=8)
        self.assertEqual(haar_pdf(0.0, 16), 15.0)
        self.assertEqual(haar_pdf(1.0, 16), 0.0)
        self.assertEqual(haar_pdf(0.3, 2), 1.0)
        self.assertEqual(haar_pdf(np.array([0.0, 0.5]), 4).tolist(), [3.0, 0.75])

    def test_pdf_errors(self):
        with self.assertRaises(ConfigError):
            haar_pdf(1.5, 4)
        with self.assertRaises(ConfigError):
            haar_pdf(0.5, 1)
        with self.assertRaises(ConfigError):
            haar_bin_probabilities(4, 0)

    def test_bin_probabilities(self):
        for dim in [2, 4, 16]:
            Q = haar_bin_probabilities(dim, 20)
            self.assertAlmostEqual(Q.sum(), 1.0, places=12)
            edges = np.linspace(0, 1, 21)
            for i in [0, 7, 19]:
                expected, _ = integrate.quad(lambda F: haar_pdf(F, dim), edges[i], edges[i + 1])
                self.assertAlmostEqual(Q[i], expected, places=10)
        np.testing.assert_allclose(haar_bin_probabilities(2, 4), [0.25] * 4)

    def test_self_divergence(self):
        """ samples of the Haar law itself are close to zero divergence """
        rng = np.random.default_rng(0)
        fidelities = sample_haar_fidelities(16, 200000, rng)
        expr, expr_prime = expr_from_fidelities(fidelities, 16, bins=50)
        self.assertLess(expr, 0.005)
        self.assertGreater(expr_prime, -math.log(0.005))

    def test_random_states(self):
        """ fidelities of pairs of normalized gaussian states follow the Haar law """
        rng = np.random.default_rng(1)
        fidelities = [fidelity(haar_state(2, rng), haar_state(2, rng)) for _ in range(20000)]
        expr, _ = expr_from_fidelities(fidelities, 4, bins=20)
        self.assertLess(expr, 0.01)

    def test_histogram_closed_last_bin(self):
        counts = fidelity_histogram([0.0, 0.5, 1.0, 1.0], 4)
        self.assertEqual(counts.tolist(), [1, 0, 1, 2])


class test_expr(unittest.TestCase):

    def test_constant_fidelity(self):
        """ all the mass in the last bin: expr is -log(Q_last + eps) """
        Q = haar_bin_probabilities(16, 50)
        expr, expr_prime = expr_from_fidelities(np.ones(100), 16, bins=50, eps=1e-16)
        self.assertAlmostEqual(expr, -math.log(Q[-1] + 1e-16), places=9)
        self.assertAlmostEqual(expr_prime, -math.log(expr), places=12)
        self.assertLess(expr_prime, 0.0)

    def test_zero_divergence(self):
        """ a histogram that equals Q exactly gives expr' = inf """
        expr, expr_prime = expr_from_fidelities([0.1, 0.4, 0.6, 0.9], 2, bins=2, eps=0.0)
        self.assertEqual(expr, 0.0)
        self.assertEqual(expr_prime, math.inf)

    def test_errors(self):
        with self.assertRaises(ConfigError):
            expr_from_fidelities([], 4)
        with self.assertRaises(NumericError):
            expr_from_fidelities([0.5, np.nan], 4)

    def test_sample_fidelities(self):
        circuit = build_template('integrated', 2, 8, seed=3, n_qubits=2)
        fidelities = sample_fidelities(circuit, 50, np.random.default_rng(0))
        self.assertEqual(fidelities.shape, (50,))
        self.assertTrue(np.all(fidelities >= 0.0) and np.all(fidelities <= 1.0))
        with self.assertRaises(ConfigError):
            sample_fidelities(circuit, 0, np.random.default_rng(0))

    def test_threshold_pairs(self):
        """ binary inputs encode basis states, and the processing circuit keeps them orthogonal or equal """
        circuit = build_template('threshold', 2, 0.6, seed=1)
        fidelities = sample_fidelities(circuit, 100, np.random.default_rng(2))
        np.testing.assert_allclose(np.minimum(fidelities, 1.0 - fidelities), 0.0, atol=1e-9)
        self.assertTrue(np.any(fidelities > 0.5))

    def test_templates(self):
        circuit = build_template('integrated', 2, 12, seed=4, n_qubits=3, alpha='rndlin')
        self.assertEqual((circuit.family, len(circuit.gates), circuit.n_qubits), ('integrated', 12, 3))
        circuit = build_template('rotational', 2, 1.0, seed=4)
        self.assertEqual(circuit.processing, 'henderson')
        self.assertEqual(circuit.n_qubits, 4)
        with self.assertRaises(ConfigError):
            build_template('henderson', 2, 0.5, seed=4)

    def test_repeat_deterministic(self):
        first = expressibility_repeat('integrated', 2, 6, 0, 11, 40, bins=10, n_qubits=2)
        second = expressibility_repeat('integrated', 2, 6, 0, 11, 40, bins=10, n_qubits=2)
        other = expressibility_repeat('integrated', 2, 6, 1, 11, 40, bins=10, n_qubits=2)
        self.assertEqual(first, second)
        self.assertNotEqual(first, other)

    def test_more_gates_more_expressive(self):
        few, many = expr_sweep('integrated', [4, 32], 2, seed=0, repeats=3, n_pairs=400, bins=20, n_qubits=2)
        self.assertGreater(many.mean_expr_prime, few.mean_expr_prime)

    def test_gates_rank_correlation(self):
        reports = expr_sweep('integrated', list(range(4, 41, 4)), 2, seed=3, repeats=4, n_pairs=256, bins=20,
                             n_qubits=4)
        rho, _ = spearmanr([r.value for r in reports], [r.mean_expr_prime for r in reports])
        self.assertGreater(rho, 0.8)

    def test_henderson_no_trend(self):
        """ the processing circuit is unitary and shared by both inputs of a pair, p leaves expr' unchanged """
        reports = expr_sweep('rotational', [0.05, 0.15, 0.35, 0.55, 0.75, 0.95], 3, seed=8, repeats=10,
                             n_pairs=128, bins=20)
        self.assertEqual([r.n_qubits for r in reports], [9] * 6)
        for i, first in enumerate(reports):
            for second in reports[i + 1:]:
                self.assertLessEqual(abs(first.mean_expr_prime - second.mean_expr_prime),
                                     first.std_expr_prime + second.std_expr_prime,
                                     msg='p=%s and p=%s' % (first.value, second.value))

    def test_rndlin_below_simple(self):
        simple, = expr_sweep('integrated', [8], 2, seed=0, repeats=10, n_pairs=256, bins=20, n_qubits=4)
        rndlin, = expr_sweep('integrated', [8], 2, seed=0, repeats=10, n_pairs=256, bins=20, n_qubits=4,
                             alpha='rndlin')
        self.assertEqual(rndlin.alpha, 'rndlin')
        self.assertLess(rndlin.mean_expr_prime, simple.mean_expr_prime)


class test_report(unittest.TestCase):

    def test_sweep(self):
        reports = expr_sweep('rotational', [0.0, 0.5], 2, seed=5, repeats=2, n_pairs=20, bins=10)
        self.assertEqual(len(reports), 2)
        report = reports[1]
        self.assertEqual((report.family, report.grid, report.value, report.n_qubits), ('rotational', 'p', 0.5, 4))
        self.assertIsNone(report.alpha)
        self.assertEqual(report.repeats, 2)
        self.assertAlmostEqual(report.std_expr_prime, float(np.std(report.expr_prime, ddof=1)))
        with self.assertRaises(ConfigError):
            expr_sweep('rotational', [0.5], 2, seed=5, repeats=0)

    def test_statistics(self):
        report = ExprReport('integrated', 2, 4, 'simple', 'gates', 8, 100, 50)
        report.expr_prime.append(1.5)
        self.assertEqual(report.std_expr_prime, 0.0)
        report.expr_prime.extend([2.5, 2.0])
        self.assertEqual(report.mean_expr_prime, 2.0)
        self.assertAlmostEqual(report.std_expr_prime, 0.5)
        self.assertEqual(report.toJSON()['repeats'], 3)

    def test_write(self):
        report = ExprReport('integrated', 2, 4, 'simple', 'gates', 8, 100, 50, expr=[0.2, 0.3],
                            expr_prime=[1.6094379124341003, 1.2039728043259361])
        tmpdir = tempfile.mkdtemp()
        try:
            filename = os.path.join(tmpdir, 'expr.csv')
            write_expr_report([report], filename)
            with open(filename) as f:
                rows = list(csv.DictReader(f))
            self.assertEqual(len(rows), 1)
            self.assertEqual(rows[0]['grid'], 'gates')
            self.assertEqual(rows[0]['repeats'], '2')
            self.assertEqual([float(v) for v in rows[0]['expr_prime_values'].split(';')], report.expr_prime)
        finally:
            shutil.rmtree(tmpdir)


if __name__ == '__main__':
    unittest.main()
