# -*- coding: utf-8 -*-

"""
N-level quantization of images, patch statistics, and the memo table linking
each quantized patch to the output of a filter.
"""

import csv
import struct
import threading
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from quanvolve.exceptions import ConfigError, DataError, NumericError
from quanvolve.utils import logger

NEAREST, FLOOR = 'nearest', 'floor'
VARIANTS = (NEAREST, FLOOR)
PADDINGS = ('same', 'none')

MEMO_MAGIC = b'QVMEMO01'
MEMO_HEADER = struct.Struct('<8sIII')
MEMO_SECTION = struct.Struct('<HQ')

# images are concatenated into chunks of about this many patches before taking unique rows
CENSUS_CHUNK = 1 << 22


def check_levels(N):
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 2:
        raise ConfigError('Number of levels must be an integer >= 2, got %r.' % (N,))
    if N > 1 << 16:
        raise ConfigError('At most %d levels are supported, got %d.' % (1 << 16, N))
    return int(N)


def check_variant(variant):
    if variant not in VARIANTS:
        raise ConfigError('Unknown quantization variant `%s`, expected one of %s.' % (variant, ', '.join(VARIANTS)))
    return variant


def quantize_indices(values, N, variant=NEAREST):
    """
    level index of every value, nearest rounds half-up, floor is floor(x*N) capped at N-1

    :param values: array of pixels in [0,1]
    :param N: number of levels
    :param variant: nearest or floor
    :return: int array of level indices in {0, ..., N-1}
    """
    N = check_levels(N)
    check_variant(variant)
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
        raise ConfigError('Pixel values must lie in [0, 1].')
    if variant == NEAREST:
        indices = np.floor(values * (N - 1) + 0.5)
    else:
        indices = np.floor(values * N)
    return np.minimum(indices, N - 1).astype(np.int64)


def quantize_pixel(x, N, variant=NEAREST):
    """

    :param x: pixel in [0,1]
    :param N: number of levels
    :param variant:
    :return: the grid value index/(N-1)
    """
    return float(quantize_indices(x, N, variant)) / (N - 1)


@dataclass(frozen=True, eq=False)
class QuantizedImage:
    """
    level indices of an image, pixel value = index/(N-1)
    """
    width: int
    height: int
    levels: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (self.height, self.width):
            raise DataError('Quantized image data has shape %s, expected %s.'
                            % (self.data.shape, (self.height, self.width)))
        if self.data.size and (self.data.min() < 0 or self.data.max() >= self.levels):
            raise DataError('Level index outside [0, %d).' % self.levels)

    def values(self):
        """

        :return: pixel values on the grid {0, 1/(N-1), ..., 1}
        """
        return self.data / float(self.levels - 1)

    def __eq__(self, other):
        return isinstance(other, QuantizedImage) and self.levels == other.levels and \
            np.array_equal(self.data, other.data)


def quantize_image(image, N, variant=NEAREST):
    """

    :param image: 2d array of pixels in [0,1]
    :param N:
    :param variant:
    :return: QuantizedImage
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise DataError('Expected a 2d grayscale image, got shape %s.' % (image.shape,))
    data = quantize_indices(image, N, variant)
    data.setflags(write=False)
    return QuantizedImage(width=image.shape[1], height=image.shape[0], levels=int(N), data=data)


def dequantize(quantized):
    """

    :param quantized:
    :return: float image
    """
    return quantized.values()


def mse(original, quantized):
    """

    :param original: 2d float image
    :param quantized: QuantizedImage of the same size
    :return: mean of (x - q(x))^2
    """
    original = np.asarray(original, dtype=np.float64)
    if original.shape != (quantized.height, quantized.width):
        raise DataError('Image of shape %s does not match the quantized image of shape %s.'
                        % (original.shape, (quantized.height, quantized.width)))
    return float(np.mean((original - quantized.values()) ** 2))


def mse_bound(N):
    """
    worst case mean squared error of nearest-point quantization

    :param N:
    :return: 1/(4(N-1)^2)
    """
    N = check_levels(N)
    return 1.0 / (4.0 * (N - 1) ** 2)


@dataclass(frozen=True)
class PatchKey:
    k: int
    indices: Tuple[int, ...]

    @classmethod
    def from_row(cls, k, row):
        return cls(k, tuple(int(i) for i in row))

    def values(self, N):
        """

        :param N: levels
        :return: pixel values of the patch, row-major
        """
        return np.array(self.indices, dtype=np.float64) / float(N - 1)


def pad_widths(k, padding):
    """
    same padding puts the extra row and column at the bottom/right for even k

    :param k:
    :param padding:
    :return: (before, after)
    """
    if padding == 'none':
        return 0, 0
    if padding == 'same':
        before = (k - 1) // 2
        return before, k - 1 - before
    raise ConfigError('Unknown padding `%s`, expected one of %s.' % (padding, ', '.join(PADDINGS)))


def patch_windows(data, k, padding='same'):
    """
    every k x k window of a level index array, stride 1, row-major

    :param data: 2d int array
    :param k:
    :param padding: same pads with level 0, none keeps only full windows
    :return: array of shape (n_patches, k^2)
    """
    if k < 1:
        raise ConfigError('Kernel size must be >= 1, got %d.' % k)
    before, after = pad_widths(k, padding)
    if before or after:
        data = np.pad(data, ((before, after), (before, after)), mode='constant', constant_values=0)
    if data.shape[0] < k or data.shape[1] < k:
        raise DataError('Image of shape %s is smaller than the %dx%d kernel.' % (data.shape, k, k))
    windows = sliding_window_view(data, (k, k))
    return windows.reshape(-1, k * k)


def _encoder(k2, N):
    """

    :param k2: pixels per patch
    :param N:
    :return: place values packing a patch into one int64 code, None when N^(k^2) does not fit
    """
    if int(N) ** k2 >= 2 ** 63:
        return None
    return np.asarray([int(N) ** p for p in range(k2 - 1, -1, -1)], dtype=np.int64)


def unique_patches(windows, N):
    """
    unique rows of a window array, using integer codes in base N when they fit

    :param windows: (n, k^2) int array
    :param N: levels
    :return: (unique rows sorted lexicographically, inverse index of every window)
    """
    windows = np.asarray(windows, dtype=np.int64)
    if windows.shape[0] == 0:
        return windows.reshape(0, windows.shape[1]), np.zeros(0, dtype=np.int64)
    place = _encoder(windows.shape[1], N)
    if place is not None:
        _, first, inverse = np.unique(windows @ place, return_index=True, return_inverse=True)
        return windows[first], inverse.reshape(-1)
    rows, inverse = np.unique(windows, axis=0, return_inverse=True)
    return rows, inverse.reshape(-1)


def patch_census(dataset, k, padding='none'):
    """
    total and unique patches over a quantized dataset

    :param dataset: list of QuantizedImage sharing one number of levels
    :param k:
    :param padding: none by default, same is available for the padded layer input
    :return: dict with total_patches, unique_patches, reduction_percent
    """
    total = 0
    N = None
    seen = None
    pending = []
    pending_size = 0

    def merge(seen, pending):
        merged, _ = unique_patches(np.concatenate(pending if seen is None else [seen] + pending), N)
        return merged

    for image in dataset:
        if N is None:
            N = image.levels
        elif image.levels != N:
            raise DataError('Images quantized to %d and %d levels in one census.' % (N, image.levels))
        windows = patch_windows(image.data, k, padding)
        total += windows.shape[0]
        rows, _ = unique_patches(windows, N)
        pending.append(rows)
        pending_size += rows.shape[0]
        if pending_size >= CENSUS_CHUNK:
            seen = merge(seen, pending)
            pending, pending_size = [], 0
    if pending:
        seen = merge(seen, pending)

    unique = 0 if seen is None else int(seen.shape[0])
    reduction = 100.0 * (1.0 - float(unique) / total) if total else 0.0
    return {'total_patches': int(total), 'unique_patches': unique, 'reduction_percent': reduction}


class MemoTable(object):
    """
    filter id -> {PatchKey: decoded scalar}, for one kernel size and number of levels

    concurrent callers may evaluate the same key twice, only the first stored result is kept
    """

    def __init__(self, k, levels):
        self.k = int(k)
        self.levels = check_levels(levels)
        self.tables = {}
        self.hits = 0
        self.misses = 0
        self.evaluations = 0
        self._lock = threading.Lock()

    def _check_key(self, key):
        if key.k != self.k or len(key.indices) != self.k * self.k:
            raise ConfigError('Patch key of kernel size %d used with a memo table of kernel size %d.'
                              % (key.k, self.k))

    def get(self, filter_id, key):
        """

        :param filter_id:
        :param key:
        :return: the stored value or None, counters are not touched
        """
        with self._lock:
            return self.tables.get(filter_id, {}).get(key, None)

    def put(self, filter_id, key, value):
        """
        stores a value unless the key is already present

        :param filter_id:
        :param key:
        :param value:
        :return: the value kept in the table
        """
        self._check_key(key)
        value = float(value)
        if not 0.0 <= value <= 1.0:
            raise NumericError('Memo value %r for filter %s outside [0, 1].' % (value, filter_id))
        with self._lock:
            return self.tables.setdefault(filter_id, {}).setdefault(key, value)

    def lookup_or_compute(self, filter_id, key, evaluator):
        """

        :param filter_id: circuit hash plus decode tag
        :param key: PatchKey
        :param evaluator: called with the key on a miss
        :return: stored scalar
        """
        self._check_key(key)
        with self._lock:
            value = self.tables.get(filter_id, {}).get(key, None)
            if value is not None:
                self.hits += 1
                return value
            self.misses += 1
        result = evaluator(key)
        with self._lock:
            self.evaluations += 1
        return self.put(filter_id, key, result)

    def size(self, filter_id=None):
        """ number of stored values, of one filter or of every filter """
        with self._lock:
            if filter_id is not None:
                return len(self.tables.get(filter_id, {}))
            return sum(len(table) for table in self.tables.values())

    def __len__(self):
        return self.size()

    def filter_ids(self):
        with self._lock:
            return sorted(self.tables)

    @property
    def hit_rate(self):
        lookups = self.hits + self.misses
        return float(self.hits) / lookups if lookups else 0.0

    def save(self, filename):
        """
        binary layout: magic, k, N, number of sections, then per filter id (sorted)
        the id, the entry count, and entries sorted by key, each k^2 uint16 indices and one f64

        :param filename:
        :return:
        """
        k2 = self.k * self.k
        record = np.dtype([('indices', '<u2', (k2,)), ('value', '<f8')])
        with self._lock:
            snapshot = dict((fid, dict(table)) for fid, table in self.tables.items())
        with open(filename, 'wb') as f:
            f.write(MEMO_HEADER.pack(MEMO_MAGIC, self.k, self.levels, len(snapshot)))
            for filter_id in sorted(snapshot):
                entries = sorted(snapshot[filter_id].items(), key=lambda item: item[0].indices)
                encoded = filter_id.encode('utf-8')
                f.write(MEMO_SECTION.pack(len(encoded), len(entries)))
                f.write(encoded)
                body = np.zeros(len(entries), dtype=record)
                if entries:
                    body['indices'] = [key.indices for key, _ in entries]
                    body['value'] = [value for _, value in entries]
                f.write(body.tobytes())
        logger.debug('Saved memo table with %d entries for %d filters to %s.'
                     % (sum(len(t) for t in snapshot.values()), len(snapshot), filename))

    @classmethod
    def load(cls, filename):
        """

        :param filename:
        :return: MemoTable, counters start at zero
        """
        try:
            with open(filename, 'rb') as f:
                buffer = f.read()
        except (IOError, OSError) as e:
            raise DataError('Unable to read memo file %s: %s' % (filename, e))
        if len(buffer) < MEMO_HEADER.size:
            raise DataError('Memo file %s is truncated.' % filename, 0)
        magic, k, levels, n_sections = MEMO_HEADER.unpack_from(buffer, 0)
        if magic != MEMO_MAGIC:
            raise DataError('Memo file %s has an unknown magic %r.' % (filename, magic), 0)
        table = cls(k, levels)
        record = np.dtype([('indices', '<u2', (k * k,)), ('value', '<f8')])
        offset = MEMO_HEADER.size
        for _ in range(n_sections):
            if offset + MEMO_SECTION.size > len(buffer):
                raise DataError('Memo file %s is truncated.' % filename, offset)
            id_length, n_entries = MEMO_SECTION.unpack_from(buffer, offset)
            offset += MEMO_SECTION.size
            end = offset + id_length + n_entries * record.itemsize
            if end > len(buffer):
                raise DataError('Memo file %s is truncated.' % filename, offset)
            filter_id = buffer[offset:offset + id_length].decode('utf-8')
            offset += id_length
            body = np.frombuffer(buffer, dtype=record, count=n_entries, offset=offset)
            if n_entries and (body['indices'].max() >= levels or
                              np.any(body['value'] < 0.0) or np.any(body['value'] > 1.0)):
                raise DataError('Memo file %s holds out of range entries.' % filename, offset)
            table.tables[filter_id] = dict((PatchKey.from_row(k, row), float(value))
                                           for row, value in zip(body['indices'], body['value']))
            offset = end
        if offset != len(buffer):
            raise DataError('Memo file %s has trailing bytes.' % filename, offset)
        logger.debug('Loaded memo table with %d entries from %s.' % (table.size(), filename))
        return table


def lookup_or_compute(table, filter_id, key, evaluator):
    """

    :param table: MemoTable
    :param filter_id:
    :param key:
    :param evaluator:
    :return:
    """
    return table.lookup_or_compute(filter_id, key, evaluator)


def save_memo(table, filename):
    table.save(filename)


def load_memo(filename):
    return MemoTable.load(filename)


def quantization_report(datasets, k, levels, variant=NEAREST):
    """
    information loss against patch reduction for every number of levels

    :param datasets: dict of dataset name -> list of 2d float images
    :param k: kernel size
    :param levels: list of numbers of levels
    :param variant:
    :return: list of dict rows
    """
    rows = []
    for name in sorted(datasets):
        images = datasets[name]
        for N in levels:
            quantized = [quantize_image(image, N, variant) for image in images]
            errors = [mse(image, q) for image, q in zip(images, quantized)]
            census = patch_census(quantized, k, padding='none')
            rows.append({
                'dataset': name,
                'levels': int(N),
                'variant': variant,
                'mean_mse': float(np.mean(errors)) if errors else 0.0,
                'mse_bound': mse_bound(N),
                'total_patches': census['total_patches'],
                'unique_patches': census['unique_patches'],
                'reduction_percent': census['reduction_percent'],
            })
            logger.info('Dataset %s at N=%d: mse=%.3g, %d of %d patches unique (%.2f%% reduction).'
                        % (name, N, rows[-1]['mean_mse'], census['unique_patches'], census['total_patches'],
                           census['reduction_percent']))
    return rows


REPORT_COLUMNS = ['dataset', 'levels', 'variant', 'mean_mse', 'mse_bound',
                  'total_patches', 'unique_patches', 'reduction_percent']


def write_quantization_report(rows, filename):
    with open(filename, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(dict((key, repr(value) if isinstance(value, float) else value)
                                 for key, value in row.items()))
