# -*- coding: utf-8 -*-

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from quanvolve.exceptions import ConfigError, DataError


@dataclass
class AdamState:
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params, grads, state, lr=0.0003, beta1=0.9, beta2=0.999, eps=1e-8):
    """
    one bias-corrected Adam update

    :param params: dict of parameter arrays
    :param grads: dict of gradients, same keys and shapes
    :param state: AdamState, advanced in place
    :param lr:
    :param beta1:
    :param beta2:
    :param eps:
    :return: dict of updated parameters
    """
    if lr <= 0:
        raise ConfigError('Learning rate must be positive, got %r.' % lr)
    if set(params) != set(grads):
        raise DataError('Gradients for %s, parameters %s.' % (sorted(grads), sorted(params)))
    state.step += 1
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step

    updated = {}
    for key, value in params.items():
        grad = grads[key]
        if grad.shape != value.shape:
            raise DataError('Gradient of %s has shape %s, parameter %s.' % (key, grad.shape, value.shape))
        m = beta1 * state.m.get(key, 0.0) + (1.0 - beta1) * grad
        v = beta2 * state.v.get(key, 0.0) + (1.0 - beta2) * grad * grad
        state.m[key], state.v[key] = m, v
        updated[key] = value - lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
    return updated


class Adam(object):

    def __init__(self, lr=0.0003, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = AdamState()

    def step(self, model, grads):
        """
        updates the model parameters

        :param model:
        :param grads:
        :return:
        """
        model.update(adam_step(model.params, grads, self.state, self.lr, self.beta1, self.beta2, self.eps))
