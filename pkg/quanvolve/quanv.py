# -*- coding: utf-8 -*-

"""
Quanvolutional layer: a bank of non-learnable circuits slid over quantized images,
one output channel per circuit, evaluated once per unique patch.
"""

import json
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from quanvolve.circuits.common import CircuitSpec, bind, circuit_hash
from quanvolve.exceptions import ConfigError, DataError
from quanvolve.quantize import PatchKey, patch_windows, unique_patches
from quanvolve.simulator.statevector import execute, decode
from quanvolve.utils import logger, derive_seed, make_rng

DECODE_MODES = ('analytic', 'sampled', 'most_frequent')

FEATURE_MAGIC = b'QVFEAT01'
FEATURE_PREFIX = struct.Struct('<8sQ')


@dataclass(frozen=True)
class LayerConfig:
    filters: Tuple[CircuitSpec, ...]
    k: int
    padding: str = 'same'
    decode: str = 'analytic'
    shots: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'filters', tuple(self.filters))
        if not self.filters:
            raise ConfigError('A quanvolutional layer needs at least one filter.')
        for i, circuit in enumerate(self.filters):
            if circuit.k != self.k:
                raise ConfigError('Filter %d has kernel size %d, the layer uses %d.' % (i, circuit.k, self.k))
        if self.padding not in ('same', 'none'):
            raise ConfigError('Unknown padding `%s`.' % self.padding)
        if self.decode not in DECODE_MODES:
            raise ConfigError('Unknown decode mode `%s`, expected one of %s.' % (self.decode, ', '.join(DECODE_MODES)))
        if self.shots < 1:
            raise ConfigError('Number of shots must be at least 1, got %d.' % self.shots)

    @property
    def channels(self):
        return len(self.filters)

    def decode_tag(self):
        """

        :return: identifies the decoder, so that memo entries of different decoders never mix
        """
        if self.decode == 'analytic':
            return 'analytic'
        return '%s:%d:%d' % (self.decode, self.shots, self.seed)

    def filter_ids(self):
        """

        :return: memo table id of every filter
        """
        tag = self.decode_tag()
        return ['%s:%s' % (circuit_hash(circuit), tag) for circuit in self.filters]


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """
    output of the layer for one image, values in [0,1], shape (channels, height, width)
    """
    channels: int
    height: int
    width: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.channels, self.height, self.width):
            raise DataError('Feature map data has shape %s, expected %s.'
                            % (self.data.shape, (self.channels, self.height, self.width)))


def extract_patches(image, k, padding='same'):
    """

    :param image: QuantizedImage
    :param k:
    :param padding: same or none
    :return: list of (row, col, PatchKey) in row-major order
    """
    windows = patch_windows(image.data, k, padding)
    if padding == 'same':
        width = image.width
    else:
        width = image.width - k + 1
    return [(i // width, i % width, PatchKey.from_row(k, row)) for i, row in enumerate(windows)]


def evaluate_patch(circuit, values, mode='analytic', shots=1000, rng=None):
    """
    binds the circuit to the patch, simulates it, and decodes the final state

    :param circuit:
    :param values: k^2 pixel values
    :param mode:
    :param shots:
    :param rng:
    :return: scalar in [0,1]
    """
    return decode(execute(bind(circuit, values), circuit.n_qubits), mode, shots, rng)


def make_evaluator(circuit, filter_id, cfg, levels):
    """
    sampled decoders draw from a generator seeded by (layer seed, filter id, patch),
    which makes the value of a patch independent of evaluation order

    :param circuit:
    :param filter_id:
    :param cfg: LayerConfig
    :param levels: number of quantization levels
    :return: function PatchKey -> scalar
    """
    def evaluator(key):
        rng = None
        if cfg.decode != 'analytic':
            rng = make_rng(derive_seed(cfg.seed, filter_id, ','.join(str(i) for i in key.indices)))
        return evaluate_patch(circuit, key.values(levels), cfg.decode, cfg.shots, rng)
    return evaluator


def _output_shape(images, cfg):
    """

    :param images:
    :param cfg:
    :return: (height, width) of the feature maps
    """
    height, width = images[0].height, images[0].width
    for image in images:
        if (image.height, image.width) != (height, width) or image.levels != images[0].levels:
            raise DataError('Images of a dataset must share size and levels, got %dx%d/N=%d and %dx%d/N=%d.'
                            % (height, width, images[0].levels, image.height, image.width, image.levels))
    if cfg.padding == 'same':
        return height, width
    return height - cfg.k + 1, width - cfg.k + 1


def _check_memo(memo, cfg, levels):
    if memo is not None and (memo.k != cfg.k or memo.levels != levels):
        raise ConfigError('Memo table for k=%d, N=%d used with a layer of k=%d on N=%d images.'
                          % (memo.k, memo.levels, cfg.k, levels))


def _fill_channel(rows, circuit, filter_id, cfg, memo, levels, threads):
    """
    value of one filter on every unique patch, evaluating only the patches missing from the memo table

    :return: (values, number of evaluator calls)
    """
    evaluator = make_evaluator(circuit, filter_id, cfg, levels)
    keys = [PatchKey.from_row(cfg.k, row) for row in rows]
    if memo is None:
        return np.array([evaluator(key) for key in keys], dtype=np.float64), len(keys)

    calls_before = memo.evaluations

    def lookup(key):
        return memo.lookup_or_compute(filter_id, key, evaluator)

    if threads > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lookup, keys))
    else:
        values = [lookup(key) for key in keys]
    return np.array(values, dtype=np.float64), memo.evaluations - calls_before


def preprocess_dataset(dataset, cfg, memo=None, threads=1):
    """
    feature maps of every image; each distinct patch is evaluated at most once per filter

    :param dataset: list of QuantizedImage of one size and number of levels
    :param cfg: LayerConfig
    :param memo: MemoTable, None keeps no table across calls
    :param threads: number of worker threads over unique patches
    :return: (list of FeatureMap, report dict)
    """
    start = time.time()
    report = {'images': len(dataset), 'total_patches': 0, 'unique_patches': 0, 'evaluator_calls': 0,
              'evaluator_calls_per_filter': [], 'memo_hits': 0, 'memo_hit_rate': 0.0, 'wall_time': 0.0}
    if not dataset:
        return [], report

    height, width = _output_shape(dataset, cfg)
    levels = dataset[0].levels
    _check_memo(memo, cfg, levels)
    hits_before, misses_before = (memo.hits, memo.misses) if memo is not None else (0, 0)

    windows = np.concatenate([patch_windows(image.data, cfg.k, cfg.padding) for image in dataset])
    rows, inverse = unique_patches(windows, levels)
    report['total_patches'] = int(windows.shape[0])
    report['unique_patches'] = int(rows.shape[0])

    data = np.empty((len(dataset), cfg.channels, height, width), dtype=np.float64)
    for c, (circuit, filter_id) in enumerate(zip(cfg.filters, cfg.filter_ids())):
        values, calls = _fill_channel(rows, circuit, filter_id, cfg, memo, levels, threads)
        data[:, c] = values[inverse].reshape(len(dataset), height, width)
        report['evaluator_calls_per_filter'].append(int(calls))
        logger.debug('Filter %d (%s): %d unique patches, %d evaluated.' % (c, filter_id[:12], len(rows), calls))

    report['evaluator_calls'] = int(sum(report['evaluator_calls_per_filter']))
    report['memo_hits'] = (memo.hits - hits_before) if memo is not None else 0
    lookups = report['memo_hits'] + ((memo.misses - misses_before) if memo is not None else 0)
    report['memo_hit_rate'] = float(report['memo_hits']) / lookups if lookups else 0.0
    report['wall_time'] = time.time() - start
    logger.info('Preprocessed %d images with %d filters: %d patches, %d unique, %d evaluator calls in %.2fs.'
                % (len(dataset), cfg.channels, report['total_patches'], report['unique_patches'],
                   report['evaluator_calls'], report['wall_time']))
    return [FeatureMap(cfg.channels, height, width, data[i]) for i in range(len(dataset))], report


def apply_layer(image, cfg, memo=None, threads=1):
    """

    :param image: QuantizedImage
    :param cfg: LayerConfig
    :param memo: MemoTable or None
    :param threads:
    :return: FeatureMap
    """
    feature_maps, _ = preprocess_dataset([image], cfg, memo, threads)
    return feature_maps[0]


def write_features(filename, feature_maps, labels=None, provenance=None):
    """
    magic and header length, json header, then the feature maps as little-endian doubles

    :param filename:
    :param feature_maps: list of FeatureMap
    :param labels: optional class label per map
    :param provenance: dict recorded in the header (filter hashes, levels, seed, ...)
    :return:
    """
    if feature_maps:
        channels, height, width = feature_maps[0].channels, feature_maps[0].height, feature_maps[0].width
        body = np.stack([fm.data for fm in feature_maps]).astype('<f8')
    else:
        channels = height = width = 0
        body = np.zeros(0, dtype='<f8')
    if labels is not None and len(labels) != len(feature_maps):
        raise DataError('%d labels for %d feature maps.' % (len(labels), len(feature_maps)))
    header = {
        'count': len(feature_maps),
        'channels': channels,
        'height': height,
        'width': width,
        'dtype': 'f64',
        'labels': None if labels is None else [int(l) for l in labels],
        'provenance': provenance or {},
    }
    encoded = json.dumps(header, sort_keys=True).encode('utf-8')
    with open(filename, 'wb') as f:
        f.write(FEATURE_PREFIX.pack(FEATURE_MAGIC, len(encoded)))
        f.write(encoded)
        f.write(body.tobytes())


def read_features(filename):
    """

    :param filename:
    :return: (array of shape (count, channels, height, width), labels or None, header)
    """
    try:
        with open(filename, 'rb') as f:
            buffer = f.read()
    except (IOError, OSError) as e:
        raise DataError('Unable to read feature file %s: %s' % (filename, e))
    if len(buffer) < FEATURE_PREFIX.size:
        raise DataError('Feature file %s is truncated.' % filename, 0)
    magic, length = FEATURE_PREFIX.unpack_from(buffer, 0)
    if magic != FEATURE_MAGIC:
        raise DataError('Feature file %s has an unknown magic %r.' % (filename, magic), 0)
    try:
        header = json.loads(buffer[FEATURE_PREFIX.size:FEATURE_PREFIX.size + length].decode('utf-8'))
        shape = (header['count'], header['channels'], header['height'], header['width'])
    except (ValueError, KeyError) as e:
        raise DataError('Feature file %s has a malformed header: %s' % (filename, e), FEATURE_PREFIX.size)
    offset = FEATURE_PREFIX.size + length
    expected = int(np.prod(shape)) * 8
    if len(buffer) - offset != expected:
        raise DataError('Feature file %s holds %d data bytes, expected %d.'
                        % (filename, len(buffer) - offset, expected), offset)
    data = np.frombuffer(buffer, dtype='<f8', offset=offset).reshape(shape).astype(np.float64)
    labels = header.get('labels', None)
    return data, (None if labels is None else np.asarray(labels, dtype=np.int64)), header
