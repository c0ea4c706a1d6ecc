# -*- coding: utf-8 -*-

import os
import struct

import numpy as np

from quanvolve.datareaders.common import Dataset, logger
from quanvolve.exceptions import DataError

# type code of the third magic byte -> big-endian numpy dtype
IDX_TYPES = {
    0x08: np.dtype('>u1'),
    0x09: np.dtype('>i1'),
    0x0B: np.dtype('>i2'),
    0x0C: np.dtype('>i4'),
    0x0D: np.dtype('>f4'),
    0x0E: np.dtype('>f8'),
}
IDX_CODES = dict(((dtype.kind, dtype.itemsize), code) for code, dtype in IDX_TYPES.items())


def read_idx(filename):
    """
    magic (two zero bytes, type code, number of dimensions), one big-endian u32 per dimension, data

    :param filename:
    :return: numpy array with the stored shape
    """
    try:
        with open(filename, 'rb') as f:
            buffer = f.read()
    except (IOError, OSError) as e:
        raise DataError('Unable to read idx file %s: %s' % (filename, e))
    if len(buffer) < 4:
        raise DataError('Idx file %s is truncated: %d bytes, the magic needs 4.' % (filename, len(buffer)), 0)
    zero1, zero2, code, ndim = struct.unpack_from('>BBBB', buffer, 0)
    if zero1 or zero2 or code not in IDX_TYPES:
        raise DataError('Idx file %s has a bad magic %s.' % (filename, buffer[:4].hex()), 0)
    header = 4 + 4 * ndim
    if len(buffer) < header:
        raise DataError('Idx file %s is truncated: expected %d header bytes, got %d.'
                        % (filename, header, len(buffer)), len(buffer))
    shape = struct.unpack_from('>%dI' % ndim, buffer, 4)
    dtype = IDX_TYPES[code]
    expected = header + int(np.prod(shape)) * dtype.itemsize
    if len(buffer) != expected:
        raise DataError('Idx file %s has %d bytes, expected %d for shape %s.'
                        % (filename, len(buffer), expected, shape), min(len(buffer), expected))
    return np.frombuffer(buffer, dtype=dtype, offset=header).reshape(shape)


def write_idx(filename, array):
    """

    :param filename:
    :param array: numpy array of one of the idx types
    :return:
    """
    array = np.asarray(array)
    code = IDX_CODES.get((array.dtype.kind, array.dtype.itemsize), None)
    if code is None:
        raise DataError('Arrays of type %s cannot be written as idx.' % array.dtype)
    dtype = IDX_TYPES[code]
    with open(filename, 'wb') as f:
        f.write(struct.pack('>BBBB', 0, 0, code, array.ndim))
        f.write(struct.pack('>%dI' % array.ndim, *array.shape))
        f.write(array.astype(dtype).tobytes())


def labels_path(images_path):
    """
    `train-images-idx3-ubyte` -> `train-labels-idx1-ubyte`, or <images>.labels, None if neither exists

    :param images_path:
    :return:
    """
    directory, name = os.path.split(images_path)
    candidate = os.path.join(directory, name.replace('images-idx3', 'labels-idx1'))
    if candidate != images_path and os.path.exists(candidate):
        return candidate
    if os.path.exists(images_path + '.labels'):
        return images_path + '.labels'
    return None


def load(filename, labels=None, name=None, split='train'):
    """
    u8 pixels are scaled by 1/255

    :param filename: images file, (count, height, width)
    :param labels: labels file, found next to the images when None
    :param name:
    :param split:
    :return: Dataset
    """
    images = read_idx(filename)
    if images.ndim != 3:
        raise DataError('Idx images file %s has %d dimensions, expected 3.' % (filename, images.ndim))
    labels = labels or labels_path(filename)
    if labels is None:
        raise DataError('No labels file found for %s.' % filename)
    values = read_idx(labels)
    if values.shape != (images.shape[0],):
        raise DataError('Idx labels file %s holds shape %s for %d images.' % (labels, values.shape, images.shape[0]))
    if values.size and values.min() < 0:
        raise DataError('Idx labels file %s holds negative labels.' % labels)
    scale = 1.0 / 255 if images.dtype == np.dtype('>u1') else 1.0
    logger.debug('Read %d images of %dx%d from %s.' % (images.shape[0], images.shape[1], images.shape[2], filename))
    return Dataset(images=[image.astype(np.float64) * scale for image in images], labels=values.astype(np.int64),
                   name=name or os.path.basename(filename), split=split)


def save(dataset, filename, labels=None):
    """
    pixels are stored as u8, round(255 x)

    :param dataset:
    :param filename:
    :param labels: labels file, derived from filename when None
    :return: (images path, labels path)
    """
    labels = labels or os.path.join(os.path.dirname(filename),
                                    os.path.basename(filename).replace('images-idx3', 'labels-idx1'))
    if labels == filename:
        labels = filename + '.labels'
    pixels = np.clip(np.rint(dataset.as_array() * 255), 0, 255).astype(np.uint8)
    write_idx(filename, pixels)
    write_idx(labels, dataset.labels.astype(np.uint8 if dataset.n_classes <= 256 else np.int32))
    return filename, labels
