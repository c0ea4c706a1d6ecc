# -*- coding: utf-8 -*-

import csv
import math
import os

import numpy as np

from quanvolve.datareaders.common import Dataset, logger
from quanvolve.exceptions import DataError


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def load(filename, name=None, split='train', height=None, width=None):
    """
    one image per row, the label in the first column and the pixels row-major after it;
    a first row that is not numeric is taken as a header

    :param filename:
    :param name:
    :param split:
    :param height: image height, square images are assumed when None
    :param width:
    :return: Dataset
    """
    images, labels = [], []
    try:
        with open(filename, 'r', newline='') as f:
            for line, row in enumerate(csv.reader(f), 1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if line == 1 and not _is_number(row[0]):
                    continue
                try:
                    values = [float(cell) for cell in row]
                except ValueError as e:
                    raise DataError('CSV file %s, line %d: %s' % (filename, line, e))
                label, pixels = values[0], np.asarray(values[1:], dtype=np.float64)
                if label != int(label) or label < 0:
                    raise DataError('CSV file %s, line %d: label %r is not a class index.' % (filename, line, label))
                rows = height or int(math.isqrt(pixels.size))
                columns = width or (pixels.size // rows if rows else 0)
                if rows * columns != pixels.size or pixels.size == 0:
                    raise DataError('CSV file %s, line %d: %d pixels do not form a %sx%s image.'
                                    % (filename, line, pixels.size, height or '?', width or '?'))
                images.append(pixels.reshape(rows, columns))
                labels.append(int(label))
    except (IOError, OSError) as e:
        raise DataError('Unable to read csv file %s: %s' % (filename, e))
    logger.debug('Read %d images from %s.' % (len(images), filename))
    return Dataset(images=images, labels=np.asarray(labels, dtype=np.int64),
                   name=name or os.path.basename(filename), split=split)


def save(dataset, filename):
    """

    :param dataset:
    :param filename:
    :return:
    """
    with open(filename, 'w', newline='') as f:
        writer = csv.writer(f)
        for image, label in zip(dataset.images, dataset.labels):
            writer.writerow([int(label)] + [repr(float(v)) for v in np.asarray(image).reshape(-1)])
    return filename
