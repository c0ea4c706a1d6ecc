# -*- coding: utf-8 -*-

from quanvolve.datareaders import IDXfile, CSVfile, RAWfile
from quanvolve.datareaders.common import prepare, logger
from quanvolve.exceptions import ConfigError

FORMATS = ('idx', 'csv', 'raw')


def verify(fmt, filename=None):
    """
    reader module of a format; without a format the file name decides

    :param fmt: idx, csv, raw or None
    :param filename:
    :return: module with load and save, None if unknown
    """
    if fmt is None and filename:
        if filename.endswith('.csv'):
            fmt = 'csv'
        elif filename.endswith('.raw') or filename.endswith('.bin'):
            fmt = 'raw'
        elif 'idx' in filename:
            fmt = 'idx'
    if fmt == 'idx':
        return IDXfile
    if fmt == 'csv':
        return CSVfile
    if fmt == 'raw':
        return RAWfile
    return None


def load_dataset(path, fmt=None, labels=None, size=None, normalize=True, split='train'):
    """
    reads a dataset and brings every image to grayscale [0,1], resized when size is given

    :param path:
    :param fmt: idx, csv or raw
    :param labels: separate labels file, idx only
    :param size: target side length
    :param normalize: per image minmax scaling
    :param split:
    :return: Dataset
    """
    reader = verify(fmt, path)
    if reader is None:
        raise ConfigError('Unknown dataset format `%s` for %s, expected one of %s.' % (fmt, path, ', '.join(FORMATS)))
    if reader is IDXfile:
        dataset = reader.load(path, labels=labels, split=split)
    else:
        dataset = reader.load(path, split=split)
    dataset = prepare(dataset, size=size, normalize=normalize)
    logger.info('Loaded dataset %s: %d images, %d classes.' % (dataset.name, len(dataset), dataset.n_classes))
    return dataset


def save_dataset(dataset, path, fmt):
    """

    :param dataset:
    :param path:
    :param fmt:
    :return:
    """
    writer = verify(fmt)
    if writer is None:
        raise ConfigError('Unknown dataset format `%s`, expected one of %s.' % (fmt, ', '.join(FORMATS)))
    return writer.save(dataset, path)


def write_idx(dataset, path, labels=None):
    return IDXfile.save(dataset, path, labels)


def write_csv(dataset, path):
    return CSVfile.save(dataset, path)


def write_raw(dataset, path):
    return RAWfile.save(dataset, path)
