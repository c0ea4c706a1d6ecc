# -*- coding: utf-8 -*-

import math

LOG_STDOUT = True

# possible values: WARN, INFO, DEBUG
LOGGING_LEVEL = 'INFO'


# registry db config, recording is off unless enabled in local_config.py
SQLALCHEMY_URL = 'sqlite:///quanvolve.db'
SQLALCHEMY_TRACK_MODIFICATIONS = False
SQLALCHEMY_ECHO = False
REGISTRY_ENABLED = False


# celery config
CELERY_INCLUDE = ['quanvolve.tasks']
CELERY_BROKER = 'pyamqp://'
CELERY_BACKEND = 'redis://localhost:6379/0'
QUEUE_MAX_RETRY = 3
QUEUE_POLL_SECONDS = 10


# images are down-scaled to IMAGE_SIZE x IMAGE_SIZE before quantization
IMAGE_SIZE = 30
QUANTIZATION_LEVELS = 50
# nearest or floor
QUANTIZATION_VARIANT = 'nearest'


# quanvolutional layer
KERNEL_SIZE = 3
N_QUBITS = 4
N_FILTERS = 8
HENDERSON_PROBABILITY = 0.15
# analytic, sampled or most_frequent
DECODE_MODE = 'analytic'
DECODE_SHOTS = 1000
HIGHER_ORDER_SCALE = math.pi ** 2


# expressibility
EXPR_PAIRS = 1024
EXPR_BINS = 50
EXPR_EPSILON = 1e-16
EXPR_REPEATS = 10


# classical head
LEARNING_RATE = 0.0003
BATCH_SIZE = 16
PATIENCE = 10
PATIENCE_RNDLIN = 100
MAX_EPOCHS = 200
DROPOUT = 0.2
CONV_CHANNELS = 16
DENSE_UNITS = 32
