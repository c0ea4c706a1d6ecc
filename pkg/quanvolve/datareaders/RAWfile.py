# -*- coding: utf-8 -*-

import json
import os

import numpy as np

from quanvolve.datareaders.common import Dataset, logger
from quanvolve.exceptions import DataError


def sidecar(filename):
    return filename + '.json'


def load(filename, name=None, split='train'):
    """
    little-endian doubles, described by the json sidecar `<filename>.json`
    holding count, height, width, dtype and the labels

    :param filename:
    :param name:
    :param split:
    :return: Dataset
    """
    try:
        with open(sidecar(filename), 'r') as f:
            header = json.load(f)
        with open(filename, 'rb') as f:
            buffer = f.read()
    except (IOError, OSError, ValueError) as e:
        raise DataError('Unable to read raw dataset %s: %s' % (filename, e))
    try:
        count, height, width = int(header['count']), int(header['height']), int(header['width'])
        labels = np.asarray(header['labels'], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as e:
        raise DataError('Raw dataset header %s is malformed: %s' % (sidecar(filename), e))
    if header.get('dtype', 'f64') != 'f64':
        raise DataError('Raw dataset %s has dtype %s, only f64 is supported.' % (filename, header['dtype']))
    expected = count * height * width * 8
    if len(buffer) != expected:
        raise DataError('Raw dataset %s has %d bytes, expected %d.' % (filename, len(buffer), expected),
                        min(len(buffer), expected))
    if labels.shape != (count,):
        raise DataError('Raw dataset header %s holds %d labels for %d images.' % (sidecar(filename), labels.size, count))
    data = np.frombuffer(buffer, dtype='<f8').reshape(count, height, width).astype(np.float64)
    logger.debug('Read %d images of %dx%d from %s.' % (count, height, width, filename))
    return Dataset(images=list(data), labels=labels, name=name or os.path.basename(filename), split=split)


def save(dataset, filename):
    """

    :param dataset:
    :param filename:
    :return:
    """
    data = dataset.as_array()
    count, height, width = (len(dataset), data.shape[1], data.shape[2]) if len(dataset) else (0, 0, 0)
    with open(filename, 'wb') as f:
        f.write(data.astype('<f8').tobytes())
    with open(sidecar(filename), 'w') as f:
        json.dump({'count': count, 'height': height, 'width': width, 'dtype': 'f64',
                   'labels': [int(l) for l in dataset.labels]}, f, sort_keys=True, indent=1)
    return filename
