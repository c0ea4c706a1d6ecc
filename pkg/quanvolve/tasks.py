from __future__ import absolute_import, unicode_literals
from quanvolve import app as app_module
from kombu import Queue

from quanvolve.exceptions import QuanvolveError
from quanvolve.expressibility import expressibility_repeat
from quanvolve.pipeline import preprocess_files, train_and_save, load_training_inputs
from quanvolve.utils import get_config

import os

app = app_module.QuanvolvePipelineCelery('quanvolve-pipeline',
                                         proj_home=os.path.realpath(os.path.join(os.path.dirname(__file__), '../')),
                                         backend=get_config('CELERY_BACKEND', 'redis://localhost:6379/0'))

app.conf.CELERY_QUEUES = (
    Queue('preprocess', app.exchange, routing_key='preprocess'),
    Queue('expressibility', app.exchange, routing_key='expressibility'),
    Queue('train', app.exchange, routing_key='train'),
)

logger = app.logger


@app.task(queue='preprocess')
def task_preprocess_dataset(params):
    """

    :param params: dict with images, circuits, output and the optional arguments of preprocess_files
    :return: report dict, False on failure
    """
    try:
        return preprocess_files(app=app, **params)
    except QuanvolveError as e:
        logger.error('Preprocessing %s failed: %s' % (params.get('images'), e))
        return False


@app.task(queue='expressibility')
def task_expressibility_repeat(family, k, value, repeat, seed, n_pairs, bins=None, n_qubits=None, alpha='simple'):
    """
    one repeat of one grid point

    :return: [value, repeat, expr, expr_prime], False on failure
    """
    try:
        expr, expr_prime = expressibility_repeat(family, k, value, repeat, seed, n_pairs, bins=bins,
                                                 n_qubits=n_qubits, alpha=alpha)
        return [value, repeat, expr, expr_prime]
    except QuanvolveError as e:
        logger.error('Expressibility of %s at %s, repeat %d failed: %s' % (family, value, repeat, e))
        return False


@app.task(queue='train')
def task_train_model(params, seed, output):
    """

    :param params: dict with the arguments of load_training_inputs, plus alpha, classes, test and the training overrides
    :param seed: training seed
    :param output: run file
    :return: summary dict, False on failure
    """
    try:
        params = dict(params)
        alpha = params.pop('alpha', None)
        test = params.pop('test', None)
        classes = params.pop('classes', None)
        overrides = dict((key, params.pop(key, None)) for key in ('lr', 'batch_size', 'patience', 'max_epochs'))
        inputs, labels, n_classes = load_training_inputs(**params)
        test_inputs = test_labels = None
        if test:
            test_inputs, test_labels, test_classes = load_training_inputs(**test)
            n_classes = max(n_classes, test_classes)
        n_classes = max(n_classes, classes or 0)
        summary = train_and_save(inputs, labels, n_classes, seed, output, alpha=alpha,
                                 test_inputs=test_inputs, test_labels=test_labels, app=app, **overrides)
        return summary
    except QuanvolveError as e:
        logger.error('Training with seed %s failed: %s' % (seed, e))
        return False
