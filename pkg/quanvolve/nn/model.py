# -*- coding: utf-8 -*-

import json
from collections import namedtuple
from dataclasses import dataclass, asdict

import numpy as np

from quanvolve.exceptions import ConfigError, DataError, NumericError
from quanvolve.nn.layers import Conv2d, ReLU, MaxPool2d, Dropout, Flatten, Dense, LogSoftmax, nll_loss
from quanvolve.utils import canonical_json, get_config

# forward pass record, tied to the parameter version it was computed with
Cache = namedtuple('Cache', ['version', 'layers'])


@dataclass(frozen=True)
class ModelSpec:
    """
    conv -> relu -> max pool -> dropout -> flatten -> dense -> relu -> dropout -> dense -> log softmax
    """
    in_channels: int
    n_classes: int
    height: int = 30
    width: int = 30
    conv_channels: int = 16
    kernel_size: int = 3
    pool: int = 2
    dense_units: int = 32
    dropout: float = 0.2

    @classmethod
    def from_config(cls, in_channels, n_classes, height=None, width=None):
        """
        sizes from the CONV_CHANNELS, DENSE_UNITS and DROPOUT settings

        :return:
        """
        size = int(get_config('IMAGE_SIZE', 30))
        return cls(in_channels=in_channels, n_classes=n_classes,
                   height=size if height is None else height, width=size if width is None else width,
                   conv_channels=int(get_config('CONV_CHANNELS', 16)),
                   dense_units=int(get_config('DENSE_UNITS', 32)),
                   dropout=float(get_config('DROPOUT', 0.2)))

    def layers(self):
        """

        :return: list of (name, Layer), with the shape chain checked
        """
        if self.n_classes < 2:
            raise ConfigError('At least 2 classes are needed, got %d.' % self.n_classes)
        conv = Conv2d(self.in_channels, self.conv_channels, self.kernel_size)
        pool = MaxPool2d(self.pool)
        shape = pool.output_shape(conv.output_shape((self.in_channels, self.height, self.width)))
        flat = int(np.prod(shape))
        return [
            ('conv', conv),
            ('conv_relu', ReLU()),
            ('pool', pool),
            ('conv_dropout', Dropout(self.dropout)),
            ('flatten', Flatten()),
            ('dense1', Dense(flat, self.dense_units)),
            ('dense1_relu', ReLU()),
            ('dense1_dropout', Dropout(self.dropout)),
            ('dense2', Dense(self.dense_units, self.n_classes)),
            ('log_softmax', LogSoftmax()),
        ]


class Model(object):
    """
    parameters live in one dict keyed `<layer>.<name>`; every update bumps `version`
    so that caches computed before it are rejected by backward
    """

    def __init__(self, spec, params=None, rng=None):
        """

        :param spec: ModelSpec
        :param params: existing parameters, freshly initialized from rng when None
        :param rng: numpy Generator
        """
        self.spec = spec
        self.layers = spec.layers()
        self.version = 0
        if params is None:
            if rng is None:
                raise ConfigError('Initializing a model needs a seeded generator.')
            params = {}
            for name, layer in self.layers:
                for key, value in layer.parameters(rng).items():
                    params['%s.%s' % (name, key)] = value
        self.params = dict((key, np.asarray(value, dtype=np.float64)) for key, value in params.items())
        dummy = np.random.default_rng(0)
        expected = set('%s.%s' % (name, key) for name, layer in self.layers for key in layer.parameters(dummy))
        if set(self.params) != expected:
            raise DataError('Model parameters %s do not match the architecture %s.'
                            % (sorted(self.params), sorted(expected)))

    def _layer_params(self, name):
        prefix = name + '.'
        return dict((key[len(prefix):], value) for key, value in self.params.items() if key.startswith(prefix))

    def _check_batch(self, batch):
        batch = np.asarray(batch, dtype=np.float64)
        expected = (self.spec.in_channels, self.spec.height, self.spec.width)
        if batch.ndim != 4 or batch.shape[1:] != expected:
            raise DataError('Batch of shape %s does not match the model input (batch,) + %s.' % (batch.shape, expected))
        return batch

    def forward(self, batch, mode='eval', rng=None):
        """

        :param batch: (batch, channels, height, width)
        :param mode: train activates dropout
        :param rng: generator for the dropout masks
        :return: (log probabilities, cache)
        """
        if mode not in ('train', 'eval'):
            raise ConfigError('Unknown mode `%s`.' % mode)
        x = self._check_batch(batch)
        caches = []
        for name, layer in self.layers:
            x, cache = layer.forward(self._layer_params(name), x, mode == 'train', rng)
            caches.append(cache)
        if not np.all(np.isfinite(x)):
            raise NumericError('Non-finite output of the forward pass.')
        return x, Cache(self.version, caches)

    def backward(self, cache, targets, log_probs):
        """

        :param cache: from forward on the same batch with the current parameters
        :param targets: class labels
        :param log_probs: output of that forward
        :return: (loss, gradient per parameter)
        """
        if cache.version != self.version:
            raise DataError('Stale cache: computed with parameter version %d, model is at %d.'
                            % (cache.version, self.version))
        loss, grad = nll_loss(log_probs, targets)
        grads = {}
        for (name, layer), layer_cache in zip(reversed(self.layers), reversed(cache.layers)):
            grad, layer_grads = layer.backward(self._layer_params(name), layer_cache, grad)
            for key, value in layer_grads.items():
                grads['%s.%s' % (name, key)] = value
        return loss, grads

    def update(self, params):
        """

        :param params: new parameter values
        :return:
        """
        for key, value in params.items():
            if self.params[key].shape != value.shape:
                raise DataError('Parameter %s of shape %s updated with shape %s.'
                                % (key, self.params[key].shape, value.shape))
            self.params[key] = value
        self.version += 1

    def predict(self, batch):
        """

        :param batch:
        :return: predicted class per sample, ties go to the lowest class index
        """
        log_probs, _ = self.forward(batch, mode='eval')
        return np.argmax(log_probs, axis=1)

    def toJSON(self):
        """
        :return: values formatted as python dict
        """
        return {
            'spec': asdict(self.spec),
            'params': dict((key, {'shape': list(value.shape), 'values': value.reshape(-1).tolist()})
                           for key, value in sorted(self.params.items())),
        }

    @classmethod
    def fromJSON(cls, document):
        """

        :param document: as produced by toJSON
        :return:
        """
        try:
            spec = ModelSpec(**document['spec'])
            params = dict((key, np.asarray(entry['values'], dtype=np.float64).reshape(entry['shape']))
                          for key, entry in document['params'].items())
        except (KeyError, TypeError, ValueError) as e:
            raise DataError('Malformed model document: %s' % e)
        return cls(spec, params=params)


def build_model(spec, rng):
    """

    :param spec: ModelSpec
    :param rng: seed or numpy Generator
    :return:
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return Model(spec, rng=rng)


def forward(model, batch, mode='eval', rng=None):
    return model.forward(batch, mode, rng)


def backward(model, cache, targets, log_probs):
    return model.backward(cache, targets, log_probs)


def save_run(filename, model, config, history, summary=None):
    """
    run file: model weights, training configuration, per-epoch history

    :param filename:
    :param model:
    :param config: dict
    :param history: list of dict
    :param summary: optional dict (accuracy, ...)
    :return:
    """
    document = {'model': model.toJSON(), 'config': config, 'history': history, 'summary': summary or {}}
    with open(filename, 'w') as f:
        f.write(canonical_json(document))


def load_run(filename):
    """

    :param filename:
    :return: (model, config, history, summary)
    """
    try:
        with open(filename, 'r') as f:
            document = json.load(f)
    except (IOError, OSError, ValueError) as e:
        raise DataError('Unable to read run file %s: %s' % (filename, e))
    if 'model' not in document:
        raise DataError('Run file %s holds no model.' % filename)
    return Model.fromJSON(document['model']), document.get('config', {}), document.get('history', []), \
        document.get('summary', {})


def gradient_check(model, batch, targets, step=1e-5, mode='eval', seed=0):
    """
    largest relative error between backward and central finite differences of the loss;
    in train mode every forward pass replays the dropout masks of a generator seeded with `seed`

    :param model:
    :param batch:
    :param targets:
    :param step: finite difference step
    :param mode: eval or train
    :param seed: dropout seed of train mode
    :return:
    """
    def loss():
        return nll_loss(model.forward(batch, mode, np.random.default_rng(seed))[0], targets)[0]

    log_probs, cache = model.forward(batch, mode, np.random.default_rng(seed))
    _, grads = model.backward(cache, targets, log_probs)
    worst = 0.0
    for key, value in model.params.items():
        numeric = np.zeros_like(value)
        flat = value.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = loss()
            flat[i] = original - step
            minus = loss()
            flat[i] = original
            numeric.reshape(-1)[i] = (plus - minus) / (2.0 * step)
        error = np.abs(grads[key] - numeric) / np.maximum(np.abs(grads[key]) + np.abs(numeric), 1e-4)
        worst = max(worst, float(error.max()))
    return worst
