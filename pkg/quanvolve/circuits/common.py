"""
Circuit descriptions shared by every filter family: gate operations, angle sources,
mapping functions, binding to a patch, and the json document format.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from quanvolve.exceptions import ConfigError, DataError
from quanvolve.simulator.gates import PAULI, FIXED_1Q, FIXED_2Q, fixed_gate, rotation_gate, pauli_exp_gate
from quanvolve.simulator.statevector import BoundGate, MAX_QUBITS
from quanvolve.utils import canonical_json, sha256_bytes

SCHEMA_VERSION = 1

FAMILIES = ('rotational', 'threshold', 'higher_order', 'henderson', 'integrated')
PROCESSINGS = (None, 'henderson')
MAPPING_KINDS = ('simple', 'rndmul', 'rndlin')

FIXED1Q, ROT1Q, FIXED2Q, PAULIEXP2Q = 'fixed1q', 'rot1q', 'fixed2q', 'pauliexp2q'
GATE_KINDS = (FIXED1Q, ROT1Q, FIXED2Q, PAULIEXP2Q)
TWO_QUBIT_KINDS = (FIXED2Q, PAULIEXP2Q)


class CircuitError(ConfigError):
    """
    is raised when a circuit violates one of its invariants, field names the offending part
    """

    def __init__(self, message, field=None):
        if field:
            message = '%s: %s' % (field, message)
        super(CircuitError, self).__init__(message)
        self.field = field


class CircuitParseError(DataError):
    """
    is raised by deserialize for malformed documents
    """

    def __init__(self, message, field=None):
        if field:
            message = 'circuit document field `%s`: %s' % (field, message)
        super(CircuitParseError, self).__init__(message)
        self.field = field


@dataclass(frozen=True)
class MappingFn:
    """
    pixel to angle: simple x*pi, rndmul 2*beta*x*pi, rndlin (beta*x + sigma)*pi
    """
    kind: str = 'simple'
    beta: float = 0.0
    sigma: float = 0.0


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Feature:
    index: int
    mapping: MappingFn = field(default_factory=MappingFn)


@dataclass(frozen=True)
class Product:
    """
    scale * x_i * x_j, the coupling angle of the higher order encoding
    """
    indices: Tuple[int, int]
    scale: float


AngleSource = Union[Constant, Feature, Product]


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: Tuple[int, ...]
    name: Optional[str] = None
    axis: Optional[str] = None
    sigmas: Optional[Tuple[str, str]] = None
    angle: Optional[AngleSource] = None
    # feature index deciding whether a threshold X gate is applied
    condition: Optional[int] = None


@dataclass(frozen=True)
class CircuitSpec:
    family: str
    n_qubits: int
    k: int
    gates: Tuple[GateOp, ...]
    seed: Optional[int] = 0
    processing: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, 'gates', tuple(self.gates))
        validate(self)

    @property
    def n_features(self):
        return self.k * self.k


def map_alpha(fn, x):
    """
    maps a pixel in [0,1] to a rotation angle

    :param fn: MappingFn
    :param x:
    :return: radians
    """
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ConfigError('Pixel value %r outside [0, 1].' % x)
    if fn.kind == 'simple':
        return x * math.pi
    if fn.kind == 'rndmul':
        return 2.0 * fn.beta * x * math.pi
    if fn.kind == 'rndlin':
        return (fn.beta * x + fn.sigma) * math.pi
    raise ConfigError('Unknown mapping function `%s`.' % fn.kind)


def _check_feature(index, n_features, where):
    if isinstance(index, bool) or not isinstance(index, (int, np.integer)) or not 0 <= index < n_features:
        raise CircuitError('feature index %r outside [0, %d)' % (index, n_features), where)


def _validate_angle(angle, n_features, where):
    if isinstance(angle, Constant):
        if not math.isfinite(angle.value):
            raise CircuitError('constant angle must be finite', where)
    elif isinstance(angle, Feature):
        _check_feature(angle.index, n_features, where + '.index')
        mapping = angle.mapping
        if mapping.kind not in MAPPING_KINDS:
            raise CircuitError('unknown mapping `%s`' % mapping.kind, where + '.mapping.kind')
        for name in ('beta', 'sigma'):
            value = getattr(mapping, name)
            if not 0.0 <= value <= 1.0:
                raise CircuitError('%s=%r outside [0, 1]' % (name, value), where + '.mapping.' + name)
    elif isinstance(angle, Product):
        if len(angle.indices) != 2:
            raise CircuitError('product needs two feature indices', where + '.indices')
        for index in angle.indices:
            _check_feature(index, n_features, where + '.indices')
        if not math.isfinite(angle.scale):
            raise CircuitError('scale must be finite', where + '.scale')
    else:
        raise CircuitError('missing or unknown angle source', where)


def _validate_gate(gate, n_qubits, n_features, where):
    if gate.kind not in GATE_KINDS:
        raise CircuitError('unknown gate kind `%s`' % gate.kind, where + '.kind')
    expected = 2 if gate.kind in TWO_QUBIT_KINDS else 1
    if len(gate.targets) != expected:
        raise CircuitError('%s needs %d target(s), got %d' % (gate.kind, expected, len(gate.targets)), where + '.targets')
    if len(set(gate.targets)) != len(gate.targets):
        raise CircuitError('targets must be distinct', where + '.targets')
    for q in gate.targets:
        if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or not 0 <= q < n_qubits:
            raise CircuitError('qubit %r outside [0, %d)' % (q, n_qubits), where + '.targets')

    if gate.kind == FIXED1Q:
        if gate.name not in FIXED_1Q:
            raise CircuitError('unknown single-qubit gate `%s`' % gate.name, where + '.name')
        if gate.condition is not None:
            _check_feature(gate.condition, n_features, where + '.condition')
    elif gate.kind == FIXED2Q:
        if gate.name not in FIXED_2Q:
            raise CircuitError('unknown two-qubit gate `%s`' % gate.name, where + '.name')
    elif gate.kind == ROT1Q:
        if gate.axis not in ('X', 'Y', 'Z'):
            raise CircuitError('unknown rotation axis `%s`' % gate.axis, where + '.axis')
        _validate_angle(gate.angle, n_features, where + '.angle')
    elif gate.kind == PAULIEXP2Q:
        if gate.sigmas is None or len(gate.sigmas) != 2 or any(s not in PAULI for s in gate.sigmas):
            raise CircuitError('sigmas must be two labels from I, X, Y, Z', where + '.sigmas')
        _validate_angle(gate.angle, n_features, where + '.angle')


def _feature_indices(gate):
    """

    :param gate:
    :return: feature indices the gate depends on
    """
    if isinstance(gate.angle, Feature):
        return (gate.angle.index,)
    if isinstance(gate.angle, Product):
        return tuple(gate.angle.indices)
    if gate.condition is not None:
        return (gate.condition,)
    return ()


def feature_coverage(spec):
    """

    :param spec:
    :return: set of feature indices referenced anywhere in the circuit
    """
    covered = set()
    for gate in spec.gates:
        covered.update(_feature_indices(gate))
    return covered


def _validate_family(spec):
    """
    family specific invariants

    :param spec:
    :return:
    """
    k2 = spec.k * spec.k
    if spec.family == 'integrated':
        if spec.n_qubits < 2:
            raise CircuitError('integrated circuits need at least 2 qubits', 'n_qubits')
        if any(g.kind != PAULIEXP2Q for g in spec.gates):
            raise CircuitError('integrated circuits hold only Pauli exponential gates', 'gates')
        if len(spec.gates) < k2:
            raise CircuitError('L=%d, L >= k^2=%d to encode all the features' % (len(spec.gates), k2), 'gates')
        missing = set(range(k2)) - feature_coverage(spec)
        if missing:
            raise CircuitError('features %s are never encoded' % sorted(missing), 'gates')
        return
    if spec.n_qubits != k2:
        raise CircuitError('%s circuits use k^2=%d qubits' % (spec.family, k2), 'n_qubits')
    if spec.family in ('rotational', 'higher_order'):
        encoders = [g for g in spec.gates if g.kind == ROT1Q and g.axis == 'X' and isinstance(g.angle, Feature)]
        if sorted(g.targets[0] for g in encoders) != list(range(k2)) or \
                any(g.angle.index != g.targets[0] for g in encoders):
            raise CircuitError('expected one RX(x_i) gate on each qubit i', 'gates')
    if spec.family == 'higher_order':
        couplings = [g for g in spec.gates if isinstance(g.angle, Product)]
        if len(couplings) != k2 * (k2 - 1) // 2:
            raise CircuitError('expected %d ZZ couplings, got %d' % (k2 * (k2 - 1) // 2, len(couplings)), 'gates')
    if spec.family == 'threshold':
        conditioned = [g for g in spec.gates if g.condition is not None]
        if sorted(g.condition for g in conditioned) != list(range(k2)):
            raise CircuitError('expected one conditional X gate per feature', 'gates')
    if spec.family == 'henderson' and feature_coverage(spec):
        raise CircuitError('processing circuits do not read features', 'gates')


def validate(spec):
    """
    checks every invariant of a circuit, raises CircuitError naming the field

    :param spec:
    :return:
    """
    if spec.family not in FAMILIES:
        raise CircuitError('unknown family `%s`' % spec.family, 'family')
    if spec.processing not in PROCESSINGS:
        raise CircuitError('unknown processing `%s`' % spec.processing, 'processing')
    if isinstance(spec.k, bool) or not isinstance(spec.k, (int, np.integer)) or spec.k < 1:
        raise CircuitError('kernel size must be a positive integer, got %r' % (spec.k,), 'k')
    if isinstance(spec.n_qubits, bool) or not isinstance(spec.n_qubits, (int, np.integer)) or \
            not 1 <= spec.n_qubits <= MAX_QUBITS:
        raise CircuitError('n_qubits must be in [1, %d], got %r' % (MAX_QUBITS, spec.n_qubits), 'n_qubits')
    if spec.seed is not None and (isinstance(spec.seed, bool) or not isinstance(spec.seed, (int, np.integer))
                                  or not 0 <= spec.seed < 2 ** 64):
        raise CircuitError('seed must be a 64-bit unsigned integer', 'seed')
    for i, gate in enumerate(spec.gates):
        _validate_gate(gate, spec.n_qubits, spec.n_features, 'gates[%d]' % i)
    _validate_family(spec)


def resolve_angle(angle, patch):
    """

    :param angle: angle source
    :param patch: k^2 pixel values
    :return: radians
    """
    if isinstance(angle, Constant):
        return angle.value
    if isinstance(angle, Feature):
        return map_alpha(angle.mapping, patch[angle.index])
    i, j = angle.indices
    return angle.scale * float(patch[i]) * float(patch[j])


def bind(circuit, patch):
    """
    resolves every angle source against the patch, the result can be executed as is

    :param circuit: CircuitSpec
    :param patch: k^2 pixel values in [0,1], row-major
    :return: list of BoundGate
    """
    patch = np.asarray(patch, dtype=np.float64).reshape(-1)
    if patch.shape[0] != circuit.n_features:
        raise ConfigError('Patch has %d values, circuit expects k^2=%d.' % (patch.shape[0], circuit.n_features))
    if np.any(patch < 0.0) or np.any(patch > 1.0):
        raise ConfigError('Patch values must lie in [0, 1].')

    bound = []
    for gate in circuit.gates:
        if gate.kind == FIXED1Q:
            if gate.condition is not None:
                value = patch[gate.condition]
                if value not in (0.0, 1.0):
                    raise ConfigError('Threshold encoding needs binary pixels, got %r at feature %d.'
                                      % (value, gate.condition))
                if value == 0.0:
                    continue
            bound.append(BoundGate(fixed_gate(gate.name), gate.targets))
        elif gate.kind == FIXED2Q:
            bound.append(BoundGate(fixed_gate(gate.name), gate.targets))
        elif gate.kind == ROT1Q:
            bound.append(BoundGate(rotation_gate(gate.axis, resolve_angle(gate.angle, patch)), gate.targets))
        else:
            sigma1, sigma2 = gate.sigmas
            bound.append(BoundGate(pauli_exp_gate(resolve_angle(gate.angle, patch), sigma1, sigma2), gate.targets))
    return bound


def compose(encoder, processing):
    """
    appends a processing circuit to an encoder acting on the same qubits

    :param encoder:
    :param processing: a henderson processing circuit
    :return:
    """
    if processing.family != 'henderson':
        raise ConfigError('Only henderson processing circuits can be appended, got `%s`.' % processing.family)
    if encoder.n_qubits != processing.n_qubits or encoder.k != processing.k:
        raise ConfigError('Encoder (%d qubits, k=%d) and processing (%d qubits, k=%d) do not match.'
                          % (encoder.n_qubits, encoder.k, processing.n_qubits, processing.k))
    return CircuitSpec(family=encoder.family, n_qubits=encoder.n_qubits, k=encoder.k,
                       gates=encoder.gates + processing.gates, seed=processing.seed, processing='henderson')


def describe(spec):
    """

    :param spec:
    :return: gate count summary
    """
    two_qubit = sum(1 for g in spec.gates if g.kind in TWO_QUBIT_KINDS)
    return {
        'family': spec.family,
        'processing': spec.processing,
        'k': spec.k,
        'n_qubits': spec.n_qubits,
        'gates': len(spec.gates),
        'single_qubit_gates': len(spec.gates) - two_qubit,
        'two_qubit_gates': two_qubit,
        'features_covered': len(feature_coverage(spec)),
        'features': spec.n_features,
    }


def _angle_to_json(angle):
    if isinstance(angle, Constant):
        return {'source': 'constant', 'value': float(angle.value)}
    if isinstance(angle, Feature):
        return {'source': 'feature', 'index': int(angle.index),
                'mapping': {'kind': angle.mapping.kind, 'beta': float(angle.mapping.beta),
                            'sigma': float(angle.mapping.sigma)}}
    return {'source': 'product', 'indices': [int(i) for i in angle.indices], 'scale': float(angle.scale)}


def _gate_to_json(gate):
    document = {'kind': gate.kind, 'targets': [int(q) for q in gate.targets]}
    if gate.name is not None:
        document['name'] = gate.name
    if gate.axis is not None:
        document['axis'] = gate.axis
    if gate.sigmas is not None:
        document['sigmas'] = list(gate.sigmas)
    if gate.angle is not None:
        document['angle'] = _angle_to_json(gate.angle)
    if gate.condition is not None:
        document['condition'] = int(gate.condition)
    return document


def to_document(circuit):
    """

    :param circuit:
    :return: json-ready dict
    """
    return {
        'schema_version': SCHEMA_VERSION,
        'family': circuit.family,
        'processing': circuit.processing,
        'k': int(circuit.k),
        'n_qubits': int(circuit.n_qubits),
        'seed': None if circuit.seed is None else int(circuit.seed),
        'gates': [_gate_to_json(g) for g in circuit.gates],
    }


def serialize(circuit):
    """
    floats are written with repr precision so that the round trip is exact

    :param circuit:
    :return: json text
    """
    return canonical_json(to_document(circuit))


def circuit_hash(circuit):
    """

    :param circuit:
    :return: sha256 hex digest of the serialized circuit, the filter id
    """
    return sha256_bytes(serialize(circuit).encode('utf-8'))


def _require(document, key, where, types):
    if not isinstance(document, dict):
        raise CircuitParseError('expected an object', where)
    path = '%s.%s' % (where, key) if where else key
    if key not in document:
        raise CircuitParseError('missing', path)
    value = document[key]
    if isinstance(value, bool) and bool not in types:
        raise CircuitParseError('unexpected type bool', path)
    if not isinstance(value, types):
        raise CircuitParseError('unexpected type %s' % type(value).__name__, path)
    return value


def _angle_from_json(document, where):
    source = _require(document, 'source', where, (str,))
    if source == 'constant':
        return Constant(float(_require(document, 'value', where, (int, float))))
    if source == 'feature':
        mapping = _require(document, 'mapping', where, (dict,))
        return Feature(_require(document, 'index', where, (int,)),
                       MappingFn(_require(mapping, 'kind', where + '.mapping', (str,)),
                                 float(_require(mapping, 'beta', where + '.mapping', (int, float))),
                                 float(_require(mapping, 'sigma', where + '.mapping', (int, float)))))
    if source == 'product':
        indices = _require(document, 'indices', where, (list,))
        return Product(tuple(indices), float(_require(document, 'scale', where, (int, float))))
    raise CircuitParseError('unknown angle source `%s`' % source, where + '.source')


def _gate_from_json(document, where):
    kind = _require(document, 'kind', where, (str,))
    if kind not in GATE_KINDS:
        raise CircuitParseError('unknown gate kind `%s`' % kind, where + '.kind')
    targets = _require(document, 'targets', where, (list,))
    sigmas = document.get('sigmas', None)
    angle = document.get('angle', None)
    return GateOp(kind=kind,
                  targets=tuple(targets),
                  name=document.get('name', None),
                  axis=document.get('axis', None),
                  sigmas=tuple(sigmas) if isinstance(sigmas, list) else sigmas,
                  angle=_angle_from_json(angle, where + '.angle') if angle is not None else None,
                  condition=document.get('condition', None))


def from_document(document):
    """

    :param document: dict as produced by to_document
    :return: CircuitSpec
    """
    version = _require(document, 'schema_version', '', (int,))
    if version != SCHEMA_VERSION:
        raise CircuitParseError('unsupported version %d' % version, 'schema_version')
    family = _require(document, 'family', '', (str,))
    k = _require(document, 'k', '', (int,))
    n_qubits = _require(document, 'n_qubits', '', (int,))
    gates = _require(document, 'gates', '', (list,))
    seed = document.get('seed', None)
    processing = document.get('processing', None)
    try:
        return CircuitSpec(family=family, n_qubits=n_qubits, k=k,
                           gates=tuple(_gate_from_json(g, 'gates[%d]' % i) for i, g in enumerate(gates)),
                           seed=seed, processing=processing)
    except CircuitError as e:
        raise CircuitParseError(str(e), e.field)
    except (TypeError, ValueError) as e:
        raise CircuitParseError(str(e))


def deserialize(text):
    """

    :param text: json text
    :return: CircuitSpec
    """
    try:
        document = json.loads(text)
    except ValueError as e:
        raise CircuitParseError('not valid json: %s' % e)
    return from_document(document)


def save_circuit(circuit, filename):
    with open(filename, 'w') as f:
        f.write(serialize(circuit))


def load_circuit(filename):
    try:
        with open(filename, 'r') as f:
            return deserialize(f.read())
    except (IOError, OSError) as e:
        raise DataError('Unable to read circuit file %s: %s' % (filename, e))
