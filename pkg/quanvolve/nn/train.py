# -*- coding: utf-8 -*-

import math
from dataclasses import dataclass, asdict

import numpy as np

from quanvolve.exceptions import ConfigError, DataError, NumericError
from quanvolve.nn.optim import Adam
from quanvolve.utils import logger, get_config, make_rng


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.0003
    batch_size: int = 16
    patience: int = 10
    max_epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if not self.lr > 0:
            raise ConfigError('Learning rate must be positive, got %r.' % self.lr)
        if self.batch_size < 1:
            raise ConfigError('Batch size must be >= 1, got %d.' % self.batch_size)
        if self.patience < 1:
            raise ConfigError('Patience must be >= 1, got %d.' % self.patience)
        if self.max_epochs < 1:
            raise ConfigError('Number of epochs must be >= 1, got %d.' % self.max_epochs)

    @classmethod
    def from_config(cls, seed=0, alpha=None, **overrides):
        """
        defaults from LEARNING_RATE, BATCH_SIZE, PATIENCE and MAX_EPOCHS; runs on rndlin
        features use the longer PATIENCE_RNDLIN

        :param seed:
        :param alpha: mapping function kind of the filters, if any
        :param overrides: explicit values, None entries are ignored
        :return:
        """
        values = {
            'lr': float(get_config('LEARNING_RATE', 0.0003)),
            'batch_size': int(get_config('BATCH_SIZE', 16)),
            'patience': int(get_config('PATIENCE_RNDLIN', 100) if alpha == 'rndlin' else get_config('PATIENCE', 10)),
            'max_epochs': int(get_config('MAX_EPOCHS', 200)),
            'seed': seed,
        }
        values.update(dict((key, value) for key, value in overrides.items() if value is not None))
        return cls(**values)

    def toJSON(self):
        return asdict(self)


def _check_dataset(model, inputs, labels):
    inputs = np.asarray(inputs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if inputs.shape[0] == 0:
        raise ConfigError('Empty dataset.')
    if labels.shape != (inputs.shape[0],):
        raise DataError('%d labels for %d samples.' % (labels.size, inputs.shape[0]))
    if labels.min() < 0 or labels.max() >= model.spec.n_classes:
        raise DataError('Class label outside [0, %d).' % model.spec.n_classes)
    return inputs, labels


def train(model, inputs, labels, cfg):
    """
    Adam on minibatches until the training loss has not improved for `patience` epochs;
    the model returned is the one at the halting epoch

    :param model: Model, updated in place
    :param inputs: (samples, channels, height, width)
    :param labels: (samples,)
    :param cfg: TrainConfig
    :return: (model, history), history holds the mean training loss of every epoch
    """
    inputs, labels = _check_dataset(model, inputs, labels)
    rng = make_rng(cfg.seed)
    optimizer = Adam(lr=cfg.lr)
    history = []
    best = math.inf
    stale = 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(inputs.shape[0])
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            index = order[start:start + cfg.batch_size]
            log_probs, cache = model.forward(inputs[index], mode='train', rng=rng)
            loss, grads = model.backward(cache, labels[index], log_probs)
            optimizer.step(model, grads)
            total += loss * len(index)
        epoch_loss = total / len(order)
        if not math.isfinite(epoch_loss):
            raise NumericError('Training loss diverged at epoch %d.' % epoch)
        history.append({'epoch': epoch, 'loss': epoch_loss})
        logger.debug('Epoch %d: training loss %.6f.' % (epoch, epoch_loss))

        if epoch_loss < best:
            best, stale = epoch_loss, 0
        else:
            stale += 1
            if stale >= cfg.patience:
                logger.info('Training loss did not improve for %d epochs, stopped at epoch %d.' % (cfg.patience, epoch))
                break
    return model, history


def evaluate(model, inputs, labels):
    """

    :param model:
    :param inputs:
    :param labels:
    :return: fraction of samples whose most probable class (lowest index on ties) is the label
    """
    inputs, labels = _check_dataset(model, inputs, labels)
    predictions = np.concatenate([model.predict(inputs[start:start + 256])
                                  for start in range(0, inputs.shape[0], 256)])
    return float(np.mean(predictions == labels))
