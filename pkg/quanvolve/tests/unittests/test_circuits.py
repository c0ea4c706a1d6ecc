import sys, os
project_home = os.path.abspath(os.path.join(os.path.dirname(__file__), '../../../'))
if project_home not in sys.path:
    sys.path.insert(0, project_home)

import json
import math
import unittest
from itertools import product

import numpy as np
from hypothesis import given, settings, strategies as st

from quanvolve.exceptions import ConfigError, DataError
from quanvolve.circuits.common import CircuitSpec, GateOp, Feature, MappingFn, Constant, CircuitError, \
    CircuitParseError, map_alpha, bind, compose, describe, serialize, deserialize, circuit_hash, feature_coverage, \
    load_circuit, save_circuit, to_document, from_document, PAULIEXP2Q, FIXED2Q, TWO_QUBIT_KINDS
from quanvolve.circuits.rotational import rotational_encoder
from quanvolve.circuits.threshold import threshold_encoder
from quanvolve.circuits.higher_order import higher_order_encoder
from quanvolve.circuits.henderson import henderson_processing
from quanvolve.circuits.integrated import integrated_circuit
from quanvolve.circuits.handler import build_circuit, generate_filter_bank, verify
from quanvolve.simulator.gates import fixed_gate
from quanvolve.simulator.statevector import execute, decode_fraction_ones, fidelity


def two_qubit_count(circuit):
    return sum(1 for g in circuit.gates if g.kind in TWO_QUBIT_KINDS)


class test_encoders(unittest.TestCase):

    def test_rotational(self):
        circuit = rotational_encoder(2)
        self.assertEqual(circuit.n_qubits, 4)
        self.assertEqual(len(circuit.gates), 4)
        self.assertTrue(all(g.axis == 'X' and g.angle.index == g.targets[0] for g in circuit.gates))
        self.assertEqual(decode_fraction_ones(execute(bind(circuit, [0, 0, 0, 0]), 4)), 0.0)
        self.assertAlmostEqual(decode_fraction_ones(execute(bind(circuit, [1, 1, 1, 1]), 4)), 1.0, places=12)
        for k in (0, -1, 1.5):
            with self.assertRaises(ConfigError):
                rotational_encoder(k)

    def test_threshold(self):
        circuit = threshold_encoder(2)
        bound = bind(circuit, [1, 0, 0, 1])
        self.assertEqual([g.targets for g in bound], [(0,), (3,)])
        self.assertEqual(bind(circuit, [0, 0, 0, 0]), [])
        np.testing.assert_array_equal(execute([], 4).amplitudes, execute(bind(circuit, [0] * 4), 4).amplitudes)
        with self.assertRaises(ConfigError):
            bind(circuit, [0.5, 0, 0, 1])

    def test_threshold_equals_rotational(self):
        rotational, threshold = rotational_encoder(2), threshold_encoder(2)
        for patch in product((0, 1), repeat=4):
            a = execute(bind(rotational, patch), 4)
            b = execute(bind(threshold, patch), 4)
            self.assertAlmostEqual(fidelity(a, b), 1.0, delta=1e-12)

    def test_higher_order(self):
        self.assertEqual(len(higher_order_encoder(2).gates), 4 + 6)
        self.assertEqual(len(higher_order_encoder(3).gates), 9 + 36)
        circuit = higher_order_encoder(2)
        self.assertEqual(decode_fraction_ones(execute(bind(circuit, [0, 0, 0, 0]), 4)), 0.0)
        coupling = circuit.gates[-1]
        self.assertEqual(coupling.sigmas, ('Z', 'Z'))
        self.assertAlmostEqual(coupling.angle.scale, math.pi ** 2)
        self.assertAlmostEqual(higher_order_encoder(2, scale=1.0).gates[-1].angle.scale, 1.0)


class test_henderson(unittest.TestCase):

    def test_gate_sets(self):
        circuit = henderson_processing(3, 0.5, 11)
        self.assertEqual(circuit.n_qubits, 9)
        self.assertEqual(circuit.processing, 'henderson')
        self.assertEqual(feature_coverage(circuit), set())
        single = [g for g in circuit.gates if g.kind not in TWO_QUBIT_KINDS]
        self.assertTrue(1 <= len(single) <= 18)
        for gate in single:
            if gate.angle is not None:
                self.assertTrue(0.0 <= gate.angle.value < 2 * math.pi)
            else:
                self.assertIn(gate.name, ('S', 'T', 'H'))
        self.assertTrue(all(g.name in ('CNOT', 'SWAP', 'SQRT_SWAP') for g in circuit.gates if g.kind == FIXED2Q))

    def test_no_two_qubit_gates(self):
        for seed in range(50):
            self.assertEqual(two_qubit_count(henderson_processing(3, 0.0, seed)), 0)
        self.assertEqual(two_qubit_count(henderson_processing(3, 1.0, 3)), 36)

    def test_two_qubit_gate_count(self):
        counts = [two_qubit_count(henderson_processing(3, 0.15, seed)) for seed in range(2000)]
        standard_error = math.sqrt(36 * 0.15 * 0.85 / len(counts))
        self.assertLess(abs(np.mean(counts) - 5.4), 3 * standard_error)

    def test_deterministic(self):
        self.assertEqual(serialize(henderson_processing(2, 0.3, 99)), serialize(henderson_processing(2, 0.3, 99)))
        self.assertNotEqual(serialize(henderson_processing(2, 0.3, 99)), serialize(henderson_processing(2, 0.3, 98)))

    def test_invalid(self):
        for p in (-0.1, 1.5, 'a'):
            with self.assertRaises(ConfigError):
                henderson_processing(2, p, 0)
        with self.assertRaises(ConfigError):
            henderson_processing(2, 0.1, -4)

    def test_compose(self):
        circuit = compose(rotational_encoder(2), henderson_processing(2, 0.3, 5))
        self.assertEqual(circuit.family, 'rotational')
        self.assertEqual(circuit.processing, 'henderson')
        self.assertEqual(circuit.gates[:4], rotational_encoder(2).gates)
        with self.assertRaises(ConfigError):
            compose(rotational_encoder(2), henderson_processing(3, 0.3, 5))
        with self.assertRaises(ConfigError):
            compose(rotational_encoder(2), threshold_encoder(2))


class test_integrated(unittest.TestCase):

    def test_default_sizes(self):
        circuit = integrated_circuit(3, 4, 18, 'rndmul', 42)
        self.assertEqual(len(circuit.gates), 18)
        self.assertTrue(all(g.kind == PAULIEXP2Q for g in circuit.gates))
        self.assertEqual(feature_coverage(circuit), set(range(9)))
        self.assertTrue(all(g.angle.mapping.kind == 'rndmul' and g.angle.mapping.sigma == 0.0 for g in circuit.gates))
        self.assertTrue(all(0 <= q < 4 for g in circuit.gates for q in g.targets))

    def test_minimum_gates(self):
        circuit = integrated_circuit(2, 3, 4, 'simple', 1)
        self.assertEqual(sorted(g.angle.index for g in circuit.gates), [0, 1, 2, 3])
        with self.assertRaises(ConfigError):
            integrated_circuit(2, 3, 3, 'simple', 1)
        with self.assertRaises(ConfigError):
            integrated_circuit(2, 1, 4, 'simple', 1)
        with self.assertRaises(ConfigError):
            integrated_circuit(2, 3, 4, 'cubic', 1)
        with self.assertRaises(ConfigError):
            integrated_circuit(2, 3, 4.0, 'simple', 1)

    def test_numpy_integers(self):
        """ sizes taken from numpy grids build the same circuits as plain ints """
        for L in np.arange(4, 12, 4):
            circuit = integrated_circuit(np.int64(2), np.int32(3), L, 'rndlin', 5)
            self.assertEqual(serialize(circuit), serialize(integrated_circuit(2, 3, int(L), 'rndlin', 5)))
            self.assertIs(type(circuit.k), int)
        self.assertEqual(serialize(rotational_encoder(np.int64(2))), serialize(rotational_encoder(2)))
        self.assertEqual(serialize(henderson_processing(np.int64(2), np.float32(0.5), 3)),
                         serialize(henderson_processing(2, 0.5, 3)))
        with self.assertRaises(ConfigError):
            rotational_encoder(True)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 3), st.integers(2, 5), st.integers(0, 20), st.sampled_from(['simple', 'rndmul', 'rndlin']),
           st.integers(0, 2 ** 64 - 1))
    def test_feature_coverage(self, k, n_qubits, extra, alpha, seed):
        circuit = integrated_circuit(k, n_qubits, k * k + extra, alpha, seed)
        self.assertEqual(feature_coverage(circuit), set(range(k * k)))
        for gate in circuit.gates:
            self.assertTrue(0.0 <= gate.angle.mapping.beta <= 1.0 and 0.0 <= gate.angle.mapping.sigma <= 1.0)
        self.assertEqual(deserialize(serialize(circuit)), circuit)

    def test_uncovered_feature_rejected(self):
        gate = GateOp(kind=PAULIEXP2Q, targets=(0, 1), sigmas=('X', 'X'), angle=Feature(0))
        with self.assertRaises(CircuitError) as e:
            CircuitSpec(family='integrated', n_qubits=2, k=2, gates=(gate,) * 4)
        self.assertEqual(e.exception.field, 'gates')

    def test_bind(self):
        gate = GateOp(kind=PAULIEXP2Q, targets=(0, 1), sigmas=('X', 'X'), angle=Feature(0))
        circuit = CircuitSpec(family='integrated', n_qubits=2, k=1, gates=(gate,))
        bound = bind(circuit, [1.0])
        np.testing.assert_allclose(bound[0].matrix, -np.eye(4), atol=1e-15)
        again = bind(circuit, [1.0])
        np.testing.assert_array_equal(bound[0].matrix, again[0].matrix)
        with self.assertRaises(ConfigError):
            bind(circuit, [0.5, 0.5])
        with self.assertRaises(ConfigError):
            bind(circuit, [1.2])


class test_mapping(unittest.TestCase):

    def test_map_alpha(self):
        self.assertAlmostEqual(map_alpha(MappingFn('simple'), 0.5), math.pi / 2)
        self.assertEqual(map_alpha(MappingFn('rndmul', beta=0.0), 0.8), 0.0)
        self.assertAlmostEqual(map_alpha(MappingFn('rndlin', beta=0.5, sigma=0.25), 0.5), 0.5 * math.pi)
        with self.assertRaises(ConfigError):
            map_alpha(MappingFn('simple'), 1.01)
        with self.assertRaises(ConfigError):
            map_alpha(MappingFn('square'), 0.1)


class test_documents(unittest.TestCase):

    stub = os.path.join(os.path.dirname(__file__), 'stubdata', 'one_gate_circuit.json')

    def test_stub_document(self):
        circuit = load_circuit(self.stub)
        self.assertEqual(circuit.family, 'integrated')
        self.assertEqual(len(circuit.gates), 1)
        self.assertEqual(circuit.seed, 7)
        self.assertEqual(circuit.gates[0].angle, Feature(0, MappingFn('simple')))

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for seed in range(200):
            family = ['rotational', 'threshold', 'higher_order', 'henderson', 'integrated'][seed % 5]
            k = int(rng.integers(1, 3))
            circuit = build_circuit(family, k, seed=seed, p=0.4,
                                    processing='henderson' if family == 'rotational' and seed % 2 else None)
            text = serialize(circuit)
            self.assertEqual(deserialize(text), circuit)
            self.assertEqual(serialize(deserialize(text)), text)

    def test_save_load(self):
        circuit = build_circuit('integrated', 2, seed=3, alpha='rndlin')
        filename = os.path.join(os.path.dirname(__file__), 'stubdata', 'saved_circuit.json')
        try:
            save_circuit(circuit, filename)
            self.assertEqual(load_circuit(filename), circuit)
        finally:
            os.remove(filename)
        with self.assertRaises(DataError):
            load_circuit(filename)

    def test_parse_errors(self):
        with open(self.stub) as f:
            document = json.load(f)
        del document['n_qubits']
        with self.assertRaises(CircuitParseError) as e:
            from_document(document)
        self.assertEqual(e.exception.field, 'n_qubits')

        document = to_document(build_circuit('integrated', 1, seed=1, n_qubits=2))
        document['gates'][0]['kind'] = 'toffoli'
        with self.assertRaises(CircuitParseError) as e:
            from_document(document)
        self.assertEqual(e.exception.field, 'gates[0].kind')

        document = to_document(build_circuit('integrated', 1, seed=1, n_qubits=2))
        document['gates'][0]['targets'] = [0, 5]
        with self.assertRaises(CircuitParseError) as e:
            from_document(document)
        self.assertEqual(e.exception.field, 'gates[0].targets')

        document['schema_version'] = 2
        with self.assertRaises(CircuitParseError):
            from_document(document)
        with self.assertRaises(CircuitParseError):
            deserialize('{not json')
        self.assertEqual(CircuitParseError('x').exit_code, 3)

    def test_hash(self):
        a = build_circuit('integrated', 2, seed=10)
        b = build_circuit('integrated', 2, seed=10)
        c = build_circuit('integrated', 2, seed=11)
        self.assertEqual(circuit_hash(a), circuit_hash(b))
        self.assertNotEqual(circuit_hash(a), circuit_hash(c))
        self.assertEqual(len(circuit_hash(a)), 64)

    def test_constant_angles(self):
        circuit = henderson_processing(2, 0.5, 4)
        for gate in circuit.gates:
            if gate.angle is not None:
                self.assertIsInstance(gate.angle, Constant)


class test_handler(unittest.TestCase):

    def test_verify(self):
        self.assertIs(verify('integrated'), integrated_circuit)
        self.assertIs(verify('rotational'), rotational_encoder)
        self.assertIsNone(verify('frqi'))
        with self.assertRaises(ConfigError):
            build_circuit('frqi', 2)
        with self.assertRaises(ConfigError):
            build_circuit('integrated', 2, processing='henderson')

    def test_defaults(self):
        circuit = build_circuit('integrated', 3, seed=5)
        self.assertEqual(circuit.n_qubits, 4)
        self.assertEqual(len(circuit.gates), 18)
        summary = describe(circuit)
        self.assertEqual(summary['two_qubit_gates'], 18)
        self.assertEqual(summary['features_covered'], 9)

    def test_filter_bank(self):
        bank = generate_filter_bank('integrated', 8, 42, k=3, n_qubits=4, L=18, alpha='rndmul')
        self.assertEqual(len(bank), 8)
        self.assertEqual(len(set(circuit_hash(c) for c in bank)), 8)
        again = generate_filter_bank('integrated', 8, 42, k=3, n_qubits=4, L=18, alpha='rndmul')
        self.assertEqual([serialize(c) for c in bank], [serialize(c) for c in again])
        with self.assertRaises(ConfigError):
            generate_filter_bank('integrated', 0, 42, k=3)

    def test_swap_matrix_symmetry(self):
        swap = fixed_gate('SWAP')
        np.testing.assert_array_equal(swap, swap.T)


if __name__ == '__main__':
    unittest.main()
