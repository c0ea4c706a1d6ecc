from os import path
from datetime import datetime
import json
import hashlib

import numpy as np

from adsputils import setup_logging, load_config

from quanvolve.exceptions import ConfigError

proj_home = path.realpath(path.join(path.dirname(__file__), '../'))

logger = setup_logging('quanvolve')
config = {}
config.update(load_config(proj_home=proj_home))


def get_date_now():
    """

    :return: current time to the second, for the registry date columns
    """
    return datetime.now().replace(microsecond=0)


def get_config(key, default=None):
    """
    reads a config value, falling back to default when the key is missing or None

    :param key:
    :param default:
    :return:
    """
    value = config.get(key, None)
    return default if value is None else value


def derive_seed(*parts):
    """
    derives a 64-bit seed from any number of printable parts, so that child
    seeds do not depend on the order in which they are requested

    :param parts: master seed, labels, hashes, ...
    :return: integer in [0, 2^64)
    """
    digest = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, bytes):
            digest.update(part)
        else:
            digest.update(str(part).encode('utf-8'))
        digest.update(b'\x1f')
    return int.from_bytes(digest.digest(), 'little')


def make_rng(seed):
    """

    :param seed:
    :return: numpy generator seeded with seed
    """
    return np.random.default_rng(seed)


def canonical_json(document):
    """
    :param document:
    :return: json text with sorted keys, identical for identical documents
    """
    return json.dumps(document, sort_keys=True, indent=1, allow_nan=False)


def sha256_bytes(buffer):
    """

    :param buffer:
    :return:
    """
    return hashlib.sha256(buffer).hexdigest()


def sha256_file(filename):
    """

    :param filename:
    :return: hex digest of the file contents
    """
    digest = hashlib.sha256()
    with open(filename, 'rb') as f:
        for block in iter(lambda: f.read(1 << 20), b''):
            digest.update(block)
    return digest.hexdigest()


def parse_seed_range(text):
    """
    seeds can be given as `7`, `0..9` (inclusive) or `1,4,5`

    :param text:
    :return: list of integers
    """
    text = str(text).strip()
    try:
        if '..' in text:
            first, last = text.split('..')
            first, last = int(first), int(last)
            if last < first:
                raise ConfigError('Empty seed range %s.' % text)
            return list(range(first, last + 1))
        return [int(s) for s in text.split(',') if s.strip()]
    except ValueError:
        raise ConfigError('Unable to parse seed(s) `%s`.' % text)


def parse_grid(text, cast=float):
    """
    grid values can be given as `4:40` (step 1), `4:40:4`, or `0.05,0.15,0.35`

    :param text:
    :param cast:
    :return: list of values
    """
    text = str(text).strip()
    try:
        if ':' in text:
            fields = [cast(f) for f in text.split(':')]
            if len(fields) == 2:
                fields.append(cast(1))
            first, last, step = fields
            if step <= 0 or last < first:
                raise ConfigError('Invalid grid `%s`.' % text)
            count = int(np.floor((last - first) / step + 1e-9)) + 1
            return [cast(round(first + i * step, 12)) for i in range(count)]
        return [cast(f) for f in text.split(',') if f.strip()]
    except ValueError:
        raise ConfigError('Unable to parse grid `%s`.' % text)
