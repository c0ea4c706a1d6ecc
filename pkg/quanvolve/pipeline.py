# -*- coding: utf-8 -*-

"""
End to end runs: load -> quantize -> generate filters -> preprocess -> train -> eval,
with a manifest of every seed and artifact hash that is enough to repeat the run.
"""

import json
import os
from contextlib import contextmanager
from dataclasses import dataclass, asdict, fields
from typing import Optional

import numpy as np

from quanvolve.circuits.common import save_circuit, load_circuit, circuit_hash
from quanvolve.circuits.handler import generate_filter_bank, verify as verify_family
from quanvolve.datareaders.handler import load_dataset, verify as verify_format
from quanvolve.exceptions import ConfigError, DataError, QuanvolveError, PipelineError
from quanvolve.nn.model import ModelSpec, build_model, save_run, load_run
from quanvolve.nn.train import TrainConfig, train, evaluate
from quanvolve.quanv import LayerConfig, preprocess_dataset, write_features, read_features, DECODE_MODES
from quanvolve.quantize import MemoTable, quantize_image, VARIANTS
from quanvolve.utils import logger, get_config, derive_seed, canonical_json, sha256_file

MANIFEST_VERSION = 1


@dataclass
class RunConfig:
    train_path: str = ''
    train_format: Optional[str] = None
    train_labels: Optional[str] = None
    test_path: Optional[str] = None
    test_format: Optional[str] = None
    test_labels: Optional[str] = None
    output_dir: str = 'run'
    seed: int = 0
    model: str = 'qnn'
    image_size: Optional[int] = None
    levels: Optional[int] = None
    variant: Optional[str] = None
    family: str = 'integrated'
    processing: Optional[str] = None
    k: Optional[int] = None
    n_qubits: Optional[int] = None
    gates: Optional[int] = None
    alpha: str = 'simple'
    p: Optional[float] = None
    n_filters: Optional[int] = None
    decode: Optional[str] = None
    shots: Optional[int] = None
    lr: Optional[float] = None
    batch_size: Optional[int] = None
    patience: Optional[int] = None
    max_epochs: Optional[int] = None
    threads: int = 1

    def resolve(self):
        """
        fills every unset value from the configuration constants

        :return: self
        """
        defaults = {
            'image_size': int(get_config('IMAGE_SIZE', 30)),
            'levels': int(get_config('QUANTIZATION_LEVELS', 50)),
            'variant': get_config('QUANTIZATION_VARIANT', 'nearest'),
            'k': int(get_config('KERNEL_SIZE', 3)),
            'n_qubits': int(get_config('N_QUBITS', 4)),
            'p': float(get_config('HENDERSON_PROBABILITY', 0.15)),
            'n_filters': int(get_config('N_FILTERS', 8)),
            'decode': get_config('DECODE_MODE', 'analytic'),
            'shots': int(get_config('DECODE_SHOTS', 1000)),
        }
        for key, value in defaults.items():
            if getattr(self, key) is None:
                setattr(self, key, value)
        if self.gates is None and self.family == 'integrated':
            self.gates = 2 * self.k * self.k
        return self

    def validate(self, check_files=True):
        """

        :param check_files: whether the dataset files must exist
        :return: self
        """
        self.resolve()
        if self.model not in ('cnn', 'qnn'):
            raise ConfigError('Model must be cnn or qnn, got `%s`.' % self.model)
        if not self.train_path:
            raise ConfigError('A training dataset is required.')
        for path, fmt in ((self.train_path, self.train_format), (self.test_path, self.test_format)):
            if path and verify_format(fmt, path) is None:
                raise ConfigError('Unknown format for dataset %s.' % path)
        if check_files:
            for path in (self.train_path, self.train_labels, self.test_path, self.test_labels):
                if path and not os.path.exists(path):
                    raise ConfigError('Input file %s does not exist.' % path)
        if self.variant not in VARIANTS:
            raise ConfigError('Unknown quantization variant `%s`.' % self.variant)
        if self.levels < 2 or self.image_size < 1 or self.k < 1 or self.n_filters < 1:
            raise ConfigError('levels >= 2, image_size, k and n_filters >= 1 are required.')
        if self.model == 'qnn' and verify_family(self.family) is None:
            raise ConfigError('Unknown circuit family `%s`.' % self.family)
        if self.decode not in DECODE_MODES:
            raise ConfigError('Unknown decode mode `%s`.' % self.decode)
        if self.threads < 1:
            raise ConfigError('Number of threads must be >= 1, got %d.' % self.threads)
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError('Seed must be a 64-bit unsigned integer.')
        return self

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, document):
        """

        :param document:
        :return:
        """
        known = set(f.name for f in fields(cls))
        unknown = set(document) - known
        if unknown:
            raise ConfigError('Unknown run configuration keys %s.' % sorted(unknown))
        return cls(**document)

    @classmethod
    def from_json(cls, filename):
        """

        :param filename: json run configuration
        :return:
        """
        try:
            with open(filename, 'r') as f:
                document = json.load(f)
        except (IOError, OSError, ValueError) as e:
            raise ConfigError('Unable to read run configuration %s: %s' % (filename, e))
        return cls.from_dict(document)

    def seeds(self):
        """

        :return: child seed of every random stage
        """
        return {
            'filters': derive_seed(self.seed, 'filters'),
            'decode': derive_seed(self.seed, 'decode'),
            'train': derive_seed(self.seed, 'train'),
        }


@contextmanager
def stage(name):
    """
    turns any failure inside the block into a PipelineError naming the stage

    :param name:
    :return:
    """
    logger.info('Stage `%s` started.' % name)
    try:
        yield
    except PipelineError:
        raise
    except (QuanvolveError, IOError, OSError, ValueError, ArithmeticError) as e:
        logger.error('Stage `%s` failed: %s' % (name, e))
        raise PipelineError(name, e)
    logger.debug('Stage `%s` done.' % name)


def quantize_dataset(dataset, levels, variant):
    return [quantize_image(image, levels, variant) for image in dataset.images]


def model_inputs(quantized):
    """

    :param quantized: list of QuantizedImage
    :return: (count, 1, height, width) pixel values on the quantization grid
    """
    return np.stack([q.values() for q in quantized])[:, None, :, :]


def train_and_save(inputs, labels, n_classes, seed, filename, alpha=None, test_inputs=None, test_labels=None,
                   app=None, **overrides):
    """
    trains one model on preprocessed inputs and writes its run file

    :param inputs: (count, channels, height, width)
    :param labels:
    :param n_classes:
    :param seed: training seed
    :param filename: run file
    :param alpha: mapping kind of the filters, selects the patience
    :param test_inputs:
    :param test_labels:
    :param app: records the run when its registry is enabled
    :param overrides: lr, batch_size, patience, max_epochs
    :return: summary dict
    """
    cfg = TrainConfig.from_config(seed=seed, alpha=alpha, **overrides)
    spec = ModelSpec.from_config(in_channels=inputs.shape[1], n_classes=n_classes,
                                 height=inputs.shape[2], width=inputs.shape[3])
    model = build_model(spec, derive_seed(seed, 'init'))
    model, history = train(model, inputs, labels, cfg)
    summary = {'epochs': len(history), 'final_loss': history[-1]['loss'],
               'train_accuracy': evaluate(model, inputs, labels)}
    if test_inputs is not None and len(test_inputs):
        summary['accuracy'] = evaluate(model, test_inputs, test_labels)
    save_run(filename, model, cfg.toJSON(), history, summary)
    if app is not None and app.registry_enabled:
        app.record_training(filename, seed, history, summary.get('accuracy'))
    logger.info('Trained model %s: %d epochs, loss %.4f%s.'
                % (filename, len(history), summary['final_loss'],
                   ', test accuracy %.4f' % summary['accuracy'] if 'accuracy' in summary else ''))
    return summary


def evaluate_run(run_file, inputs, labels):
    """

    :param run_file:
    :param inputs:
    :param labels:
    :return: accuracy
    """
    model, _, _, _ = load_run(run_file)
    return evaluate(model, inputs, labels)


def run_pipeline(cfg, app=None):
    """

    :param cfg: RunConfig
    :param app: QuanvolvePipelineCelery, runs are recorded when its registry is enabled
    :return: manifest dict, also written to <output_dir>/manifest.json
    """
    cfg.validate()
    seeds = cfg.seeds()
    os.makedirs(cfg.output_dir, exist_ok=True)
    artifacts = []

    def output(name):
        artifacts.append(name)
        return os.path.join(cfg.output_dir, name)

    with stage('load'):
        train_set = load_dataset(cfg.train_path, cfg.train_format, cfg.train_labels, size=cfg.image_size)
        test_set = load_dataset(cfg.test_path, cfg.test_format, cfg.test_labels, size=cfg.image_size,
                                split='test') if cfg.test_path else None
        n_classes = max(train_set.n_classes, test_set.n_classes if test_set else 0)

    with stage('quantize'):
        quantized_train = quantize_dataset(train_set, cfg.levels, cfg.variant)
        quantized_test = quantize_dataset(test_set, cfg.levels, cfg.variant) if test_set else None

    if cfg.model == 'cnn':
        inputs = model_inputs(quantized_train)
        test_inputs = model_inputs(quantized_test) if quantized_test else None
        alpha = None
    else:
        with stage('generate'):
            filters = generate_filter_bank(cfg.family, cfg.n_filters, seeds['filters'], k=cfg.k,
                                           n_qubits=cfg.n_qubits if cfg.family == 'integrated' else None,
                                           L=cfg.gates if cfg.family == 'integrated' else None,
                                           alpha=cfg.alpha, p=cfg.p, processing=cfg.processing)
            os.makedirs(os.path.join(cfg.output_dir, 'filters'), exist_ok=True)
            for i, circuit in enumerate(filters):
                save_circuit(circuit, output(os.path.join('filters', 'filter_%02d.json' % i)))
            if app is not None and app.registry_enabled:
                app.record_filters(filters)

        with stage('preprocess'):
            layer = LayerConfig(filters=filters, k=cfg.k, decode=cfg.decode, shots=cfg.shots, seed=seeds['decode'])
            memo = MemoTable(cfg.k, cfg.levels)
            provenance = {'filters': [circuit_hash(c) for c in filters], 'levels': cfg.levels,
                          'variant': cfg.variant, 'decode': layer.decode_tag(), 'seed': str(cfg.seed)}
            feature_maps, report = preprocess_dataset(quantized_train, layer, memo, cfg.threads)
            write_features(output('features_train.bin'), feature_maps, train_set.labels, provenance)
            inputs = np.stack([fm.data for fm in feature_maps])
            test_inputs = None
            if quantized_test:
                test_maps, _ = preprocess_dataset(quantized_test, layer, memo, cfg.threads)
                write_features(output('features_test.bin'), test_maps, test_set.labels, provenance)
                test_inputs = np.stack([fm.data for fm in test_maps])
            memo.save(output('memo.bin'))
            logger.info('Memo table: %d entries, hit rate %.2f%%.' % (memo.size(), 100.0 * memo.hit_rate))
            if app is not None and app.registry_enabled:
                app.record_preprocess(train_set.name, layer, cfg.levels, cfg.variant, report,
                                      os.path.join(cfg.output_dir, 'features_train.bin'))
        alpha = cfg.alpha if cfg.family == 'integrated' else None

    with stage('train'):
        summary = train_and_save(inputs, train_set.labels, n_classes, seeds['train'], output('model.json'),
                                 alpha=alpha,
                                 test_inputs=test_inputs,
                                 test_labels=test_set.labels if test_set else None,
                                 app=app,
                                 lr=cfg.lr, batch_size=cfg.batch_size, patience=cfg.patience,
                                 max_epochs=cfg.max_epochs)
    with stage('eval'):
        if test_inputs is not None:
            summary['accuracy'] = evaluate_run(os.path.join(cfg.output_dir, 'model.json'), test_inputs,
                                               test_set.labels)
        with open(output('summary.json'), 'w') as f:
            f.write(canonical_json(summary))

    manifest = {
        'manifest_version': MANIFEST_VERSION,
        'config': cfg.to_dict(),
        'seeds': dict((key, str(value)) for key, value in seeds.items()),
        'artifacts': dict((name, sha256_file(os.path.join(cfg.output_dir, name))) for name in artifacts),
    }
    with open(os.path.join(cfg.output_dir, 'manifest.json'), 'w') as f:
        f.write(canonical_json(manifest))
    logger.info('Run written to %s with %d artifacts.' % (cfg.output_dir, len(artifacts)))
    return manifest


def load_manifest(filename):
    """

    :param filename:
    :return: manifest dict
    """
    try:
        with open(filename, 'r') as f:
            manifest = json.load(f)
    except (IOError, OSError, ValueError) as e:
        raise DataError('Unable to read manifest %s: %s' % (filename, e))
    for key in ('config', 'artifacts'):
        if key not in manifest:
            raise DataError('Manifest %s has no `%s`.' % (filename, key))
    return manifest


def verify_manifest(filename, output_dir=None, app=None):
    """
    reruns the configuration of a manifest into output_dir and compares every artifact hash

    :param filename: manifest.json
    :param output_dir: defaults to the original output directory followed by `-verify`
    :param app:
    :return: list of (artifact, expected hash, actual hash or None) that differ
    """
    manifest = load_manifest(filename)
    cfg = RunConfig.from_dict(manifest['config'])
    cfg.output_dir = output_dir or cfg.output_dir.rstrip('/') + '-verify'
    rerun = run_pipeline(cfg, app)
    mismatches = []
    for name, expected in sorted(manifest['artifacts'].items()):
        actual = rerun['artifacts'].get(name, None)
        if actual != expected:
            mismatches.append((name, expected, actual))
    if mismatches:
        logger.error('Manifest %s: %d artifacts differ on rerun.' % (filename, len(mismatches)))
    else:
        logger.info('Manifest %s: all %d artifacts reproduced.' % (filename, len(manifest['artifacts'])))
    return mismatches


def load_training_inputs(features=None, images=None, fmt=None, labels=None, levels=None, variant=None, size=None):
    """
    inputs of the classical head, either a feature file or a dataset that is quantized here

    :return: (inputs, labels, n_classes)
    """
    if features:
        data, feature_labels, _ = read_features(features)
        if feature_labels is None:
            raise DataError('Feature file %s carries no labels.' % features)
        return data, feature_labels, int(feature_labels.max()) + 1 if feature_labels.size else 0
    if not images:
        raise ConfigError('Either a feature file or an images dataset is required.')
    dataset = load_dataset(images, fmt, labels, size=size or int(get_config('IMAGE_SIZE', 30)))
    quantized = quantize_dataset(dataset, levels or int(get_config('QUANTIZATION_LEVELS', 50)),
                                 variant or get_config('QUANTIZATION_VARIANT', 'nearest'))
    return model_inputs(quantized), dataset.labels, dataset.n_classes


def preprocess_files(images, circuits, output, fmt=None, labels=None, size=None, levels=None, variant=None,
                     decode=None, shots=None, seed=0, memo_path=None, threads=1, app=None):
    """
    quantizes a dataset file and writes the feature maps of a filter bank read from circuit files

    :param images: dataset file
    :param circuits: list of circuit json files, one channel each
    :param output: feature file
    :param memo_path: memo table file, reused when it exists and rewritten afterwards
    :return: report of preprocess_dataset
    """
    levels = levels or int(get_config('QUANTIZATION_LEVELS', 50))
    variant = variant or get_config('QUANTIZATION_VARIANT', 'nearest')
    filters = [load_circuit(filename) for filename in circuits]
    if not filters:
        raise ConfigError('At least one circuit file is required.')
    cfg = LayerConfig(filters=filters, k=filters[0].k, decode=decode or get_config('DECODE_MODE', 'analytic'),
                      shots=shots or int(get_config('DECODE_SHOTS', 1000)), seed=seed)
    dataset = load_dataset(images, fmt, labels, size=size or int(get_config('IMAGE_SIZE', 30)))
    memo = MemoTable.load(memo_path) if memo_path and os.path.exists(memo_path) else MemoTable(cfg.k, levels)
    feature_maps, report = preprocess_dataset(quantize_dataset(dataset, levels, variant), cfg, memo, threads)
    provenance = {'filters': [circuit_hash(c) for c in filters], 'levels': levels, 'variant': variant,
                  'decode': cfg.decode_tag(), 'seed': str(seed)}
    write_features(output, feature_maps, dataset.labels, provenance)
    if memo_path:
        memo.save(memo_path)
    if app is not None and app.registry_enabled:
        app.record_filters(filters)
        app.record_preprocess(dataset.name, cfg, levels, variant, report, output)
    return report
