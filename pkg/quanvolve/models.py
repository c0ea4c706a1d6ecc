# -*- coding: utf-8 -*-


from sqlalchemy import Integer, String, Column, DateTime, Float, Text, BigInteger, func
from sqlalchemy.ext.declarative import declarative_base


Base = declarative_base()


class Filter(Base):
    """
    one generated circuit, keyed by the sha256 of its serialized document
    """
    __tablename__ = 'filter'
    filter_hash = Column(String, primary_key=True)
    family = Column(String)
    processing = Column(String)
    k = Column(Integer)
    n_qubits = Column(Integer)
    n_gates = Column(Integer)
    seed = Column(String)
    document = Column(Text)
    date = Column(DateTime, default=func.now())

    def __init__(self, filter_hash, family, processing, k, n_qubits, n_gates, seed, document, date):
        """

        :param filter_hash:
        :param family:
        :param processing:
        :param k:
        :param n_qubits:
        :param n_gates:
        :param seed: kept as text, 64-bit unsigned seeds do not fit every backend's integer
        :param document:
        :param date:
        """
        self.filter_hash = filter_hash
        self.family = family
        self.processing = processing
        self.k = k
        self.n_qubits = n_qubits
        self.n_gates = n_gates
        self.seed = seed
        self.document = document
        self.date = date

    def toJSON(self):
        """
        :return: values formatted as python dict, if no values found returns empty structure, not None
        """
        return {
            'filter_hash': self.filter_hash,
            'family': self.family,
            'processing': self.processing,
            'k': self.k,
            'n_qubits': self.n_qubits,
            'n_gates': self.n_gates,
            'seed': self.seed,
        }


class Preprocess(Base):
    __tablename__ = 'preprocess'
    id = Column(Integer, primary_key=True)
    dataset = Column(String)
    levels = Column(Integer)
    variant = Column(String)
    k = Column(Integer)
    n_filters = Column(Integer)
    decode = Column(String)
    total_patches = Column(BigInteger)
    unique_patches = Column(BigInteger)
    evaluator_calls = Column(BigInteger)
    memo_hits = Column(BigInteger)
    wall_time = Column(Float)
    features = Column(String)
    date = Column(DateTime, default=func.now())

    def __init__(self, dataset, levels, variant, k, n_filters, decode, total_patches, unique_patches,
                 evaluator_calls, memo_hits, wall_time, features, date):
        """

        :param dataset:
        :param levels:
        :param variant:
        :param k:
        :param n_filters:
        :param decode:
        :param total_patches:
        :param unique_patches:
        :param evaluator_calls:
        :param memo_hits:
        :param wall_time:
        :param features:
        :param date:
        """
        self.dataset = dataset
        self.levels = levels
        self.variant = variant
        self.k = k
        self.n_filters = n_filters
        self.decode = decode
        self.total_patches = total_patches
        self.unique_patches = unique_patches
        self.evaluator_calls = evaluator_calls
        self.memo_hits = memo_hits
        self.wall_time = wall_time
        self.features = features
        self.date = date

    def toJSON(self):
        """
        :return: values formatted as python dict, if no values found returns empty structure, not None
        """
        return {
            'id': self.id,
            'dataset': self.dataset,
            'levels': self.levels,
            'variant': self.variant,
            'k': self.k,
            'n_filters': self.n_filters,
            'decode': self.decode,
            'total_patches': self.total_patches,
            'unique_patches': self.unique_patches,
            'evaluator_calls': self.evaluator_calls,
            'memo_hits': self.memo_hits,
            'wall_time': self.wall_time,
            'features': self.features,
        }


class Expressibility(Base):
    __tablename__ = 'expressibility'
    id = Column(Integer, primary_key=True)
    family = Column(String)
    k = Column(Integer)
    n_qubits = Column(Integer)
    alpha = Column(String)
    grid = Column(String)
    value = Column(Float)
    repeats = Column(Integer)
    pairs = Column(Integer)
    mean_expr_prime = Column(Float)
    std_expr_prime = Column(Float)
    date = Column(DateTime, default=func.now())

    def __init__(self, family, k, n_qubits, alpha, grid, value, repeats, pairs, mean_expr_prime, std_expr_prime, date):
        """

        :param family:
        :param k:
        :param n_qubits:
        :param alpha:
        :param grid:
        :param value:
        :param repeats:
        :param pairs:
        :param mean_expr_prime:
        :param std_expr_prime:
        :param date:
        """
        self.family = family
        self.k = k
        self.n_qubits = n_qubits
        self.alpha = alpha
        self.grid = grid
        self.value = value
        self.repeats = repeats
        self.pairs = pairs
        self.mean_expr_prime = mean_expr_prime
        self.std_expr_prime = std_expr_prime
        self.date = date

    def toJSON(self):
        """
        :return: values formatted as python dict, if no values found returns empty structure, not None
        """
        return {
            'id': self.id,
            'family': self.family,
            'k': self.k,
            'n_qubits': self.n_qubits,
            'alpha': self.alpha,
            'grid': self.grid,
            'value': self.value,
            'repeats': self.repeats,
            'pairs': self.pairs,
            'mean_expr_prime': self.mean_expr_prime,
            'std_expr_prime': self.std_expr_prime,
        }


class Training(Base):
    __tablename__ = 'training'
    id = Column(Integer, primary_key=True)
    model_path = Column(String)
    seed = Column(String)
    epochs = Column(Integer)
    final_loss = Column(Float)
    accuracy = Column(Float, nullable=True)
    date = Column(DateTime, default=func.now())

    def __init__(self, model_path, seed, epochs, final_loss, accuracy, date):
        """

        :param model_path:
        :param seed:
        :param epochs:
        :param final_loss:
        :param accuracy:
        :param date:
        """
        self.model_path = model_path
        self.seed = seed
        self.epochs = epochs
        self.final_loss = final_loss
        self.accuracy = accuracy
        self.date = date

    def toJSON(self):
        """
        :return: values formatted as python dict, if no values found returns empty structure, not None
        """
        return {
            'id': self.id,
            'model_path': self.model_path,
            'seed': self.seed,
            'epochs': self.epochs,
            'final_loss': self.final_loss,
            'accuracy': self.accuracy,
        }
