# -*- coding: utf-8 -*-

"""
Dataset container and the image transforms applied before quantization.
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from adsputils import setup_logging

from quanvolve.exceptions import ConfigError, DataError

logger = setup_logging('quanvolve-datareaders')

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass
class Dataset:
    images: List[np.ndarray]
    labels: np.ndarray
    name: str = ''
    split: str = 'train'
    n_classes: int = field(default=0)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if len(self.images) != self.labels.shape[0]:
            raise DataError('Dataset %s has %d images and %d labels.' % (self.name, len(self.images), self.labels.shape[0]))
        if self.labels.size and self.labels.min() < 0:
            raise DataError('Dataset %s holds negative labels.' % self.name)
        if not self.n_classes and self.labels.size:
            self.n_classes = int(self.labels.max()) + 1

    def __len__(self):
        return len(self.images)

    def as_array(self):
        """

        :return: images stacked to (count, height, width)
        """
        if not self.images:
            return np.zeros((0, 0, 0), dtype=np.float64)
        shapes = set(image.shape for image in self.images)
        if len(shapes) != 1:
            raise DataError('Dataset %s holds images of shapes %s.' % (self.name, sorted(shapes)))
        return np.stack(self.images).astype(np.float64)

    def check_range(self):
        """
        every pixel must be in [0,1]

        :return:
        """
        for i, image in enumerate(self.images):
            if image.size and (not np.all(np.isfinite(image)) or image.min() < 0.0 or image.max() > 1.0):
                raise DataError('Image %d of dataset %s has pixels outside [0, 1].' % (i, self.name))
        return self


def minmax_normalize(image):
    """
    (x - min)/(max - min), constant images become all zeros

    :param image:
    :return:
    """
    image = np.asarray(image, dtype=np.float64)
    if image.size == 0:
        raise DataError('Cannot normalize an empty image.')
    low, high = image.min(), image.max()
    if high == low:
        return np.zeros_like(image)
    return (image - low) / (high - low)


def box_weights(source, target):
    """
    row i holds the share of every source pixel in the footprint of target pixel i,
    fractional at the footprint edges, each row sums to 1

    :param source:
    :param target:
    :return: (target, source) matrix
    """
    if target > source:
        raise ConfigError('Upscaling from %d to %d pixels is not supported.' % (source, target))
    if target < 1:
        raise ConfigError('Target size must be >= 1, got %d.' % target)
    scale = float(source) / target
    lo = np.arange(target)[:, None] * scale
    hi = lo + scale
    left = np.arange(source)[None, :]
    overlap = np.clip(np.minimum(hi, left + 1) - np.maximum(lo, left), 0.0, None)
    return overlap / scale


def resize(image, height, width=None):
    """
    area-average downscaling

    :param image: 2d array
    :param height:
    :param width: height when None
    :return:
    """
    width = height if width is None else width
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise DataError('Expected a 2d image, got shape %s.' % (image.shape,))
    if image.shape == (height, width):
        return image.copy()
    return box_weights(image.shape[0], height) @ image @ box_weights(image.shape[1], width).T


def grayscale(image):
    """
    luma of an (height, width, 3) image

    :param image:
    :return:
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise DataError('Expected an rgb image of shape (height, width, 3), got %s.' % (image.shape,))
    return image @ LUMA_WEIGHTS


def prepare(dataset, size=None, normalize=True):
    """
    grayscale, resize, then minmax normalize every image

    :param dataset:
    :param size: target side length, None keeps the size
    :param normalize:
    :return: new Dataset
    """
    images = []
    for image in dataset.images:
        if image.ndim == 3:
            image = grayscale(image)
        if size is not None:
            image = resize(image, size)
        if normalize:
            image = minmax_normalize(image)
        images.append(image)
    prepared = Dataset(images=images, labels=dataset.labels, name=dataset.name, split=dataset.split,
                       n_classes=dataset.n_classes)
    return prepared.check_range()


def split_dataset(dataset, fraction, rng):
    """
    random split into (train, test) with round(fraction * count) training samples

    :param dataset:
    :param fraction: in (0, 1)
    :param rng: numpy Generator
    :return:
    """
    if not 0.0 < fraction < 1.0:
        raise ConfigError('Split fraction must be in (0, 1), got %r.' % fraction)
    order = rng.permutation(len(dataset))
    cut = int(round(fraction * len(dataset)))

    def subset(index, split):
        return Dataset(images=[dataset.images[i] for i in index], labels=dataset.labels[index],
                       name=dataset.name, split=split, n_classes=dataset.n_classes)
    return subset(order[:cut], 'train'), subset(order[cut:], 'test')
