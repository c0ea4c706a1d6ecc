# -*- coding: utf-8 -*-

"""
Small synthetic image classes drawn with numpy, for runs that need no downloaded data.
"""

import numpy as np

from quanvolve.datareaders.common import Dataset, minmax_normalize
from quanvolve.exceptions import ConfigError

NOISE = 0.05


def _bars(yy, xx, rng, axis):
    period = rng.integers(4, 8)
    phase = rng.integers(0, period)
    coordinate = yy if axis == 0 else xx
    return (((coordinate + phase) % period) < period // 2).astype(np.float64)


def _blob(yy, xx, rng):
    size = yy.shape[0]
    cy, cx = rng.uniform(0.3 * size, 0.7 * size, 2)
    radius = rng.uniform(0.12 * size, 0.25 * size)
    return np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * radius ** 2))


def _stripes(yy, xx, rng, sign):
    period = rng.integers(5, 9)
    phase = rng.integers(0, period)
    return ((((xx + sign * yy) + phase) % period) < period // 2).astype(np.float64)


def _ring(yy, xx, rng):
    size = yy.shape[0]
    cy, cx = rng.uniform(0.4 * size, 0.6 * size, 2)
    radius = rng.uniform(0.2 * size, 0.35 * size)
    distance = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
    return (np.abs(distance - radius) < 1.5).astype(np.float64)


def _checker(yy, xx, rng):
    cell = rng.integers(3, 6)
    return (((yy // cell) + (xx // cell)) % 2).astype(np.float64)


# class index -> drawing function, the 2-class set uses the first two
PATTERNS = [
    lambda yy, xx, rng: _bars(yy, xx, rng, 0),
    lambda yy, xx, rng: _bars(yy, xx, rng, 1),
    _blob,
    lambda yy, xx, rng: _stripes(yy, xx, rng, 1),
    lambda yy, xx, rng: _stripes(yy, xx, rng, -1),
    _ring,
    _checker,
]


def make_image(label, size, rng):
    """

    :param label:
    :param size:
    :param rng:
    :return: minmax normalized image of the class with additive noise
    """
    yy, xx = np.mgrid[0:size, 0:size]
    image = PATTERNS[label](yy, xx, rng) + rng.normal(0.0, NOISE, (size, size))
    return minmax_normalize(image)


def make_dataset(classes, count, size=30, rng=None, split='train'):
    """
    balanced classes in random order

    :param classes: 2 or 7
    :param count: number of images
    :param size: side length
    :param rng: numpy Generator, seeded with 0 when None
    :param split:
    :return: Dataset
    """
    if classes not in (2, 7):
        raise ConfigError('Synthetic datasets have 2 or 7 classes, got %r.' % (classes,))
    if count < 0 or size < 4:
        raise ConfigError('Synthetic dataset needs count >= 0 and size >= 4.')
    if rng is None:
        rng = np.random.default_rng(0)
    labels = rng.permutation(np.arange(count) % classes)
    images = [make_image(int(label), size, rng) for label in labels]
    return Dataset(images=images, labels=labels, name='synthetic-%d' % classes, split=split, n_classes=classes)
