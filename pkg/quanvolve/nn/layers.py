# -*- coding: utf-8 -*-

"""
Numpy layers of the classical head. Every layer keeps no state between calls:
forward returns its output and a cache, backward turns the cache and the output
gradient into the input gradient and the parameter gradients.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import logsumexp

from quanvolve.exceptions import ConfigError, DataError


def uniform_init(rng, fan_in, shape):
    """
    U(-1/sqrt(fan_in), 1/sqrt(fan_in))

    :param rng:
    :param fan_in:
    :param shape:
    :return:
    """
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Layer(object):
    """
    parameter-free layers only override forward and backward
    """

    name = 'layer'

    def parameters(self, rng):
        """

        :param rng:
        :return: initial parameter arrays by name
        """
        return {}

    def output_shape(self, shape):
        return shape

    def forward(self, params, x, training, rng):
        raise NotImplementedError

    def backward(self, params, cache, grad):
        raise NotImplementedError

    def __repr__(self):
        return self.__class__.__name__


class Conv2d(Layer):
    """
    valid cross-correlation, stride 1, no padding
    """

    def __init__(self, in_channels, out_channels, kernel_size):
        if min(in_channels, out_channels, kernel_size) < 1:
            raise ConfigError('Convolution sizes must be positive.')
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size

    def parameters(self, rng):
        fan_in = self.in_channels * self.kernel_size ** 2
        return {
            'weight': uniform_init(rng, fan_in, (self.out_channels, self.in_channels, self.kernel_size, self.kernel_size)),
            'bias': uniform_init(rng, fan_in, (self.out_channels,)),
        }

    def output_shape(self, shape):
        channels, height, width = shape
        if channels != self.in_channels:
            raise ConfigError('Convolution expects %d channels, got %d.' % (self.in_channels, channels))
        if height < self.kernel_size or width < self.kernel_size:
            raise ConfigError('Input %dx%d is smaller than the %dx%d kernel.'
                              % (height, width, self.kernel_size, self.kernel_size))
        return self.out_channels, height - self.kernel_size + 1, width - self.kernel_size + 1

    def forward(self, params, x, training, rng):
        k = self.kernel_size
        windows = sliding_window_view(x, (k, k), axis=(2, 3))
        out = np.einsum('bchwij,ocij->bohw', windows, params['weight'], optimize=True)
        return out + params['bias'][None, :, None, None], windows

    def backward(self, params, cache, grad):
        k = self.kernel_size
        windows = cache
        grads = {
            'weight': np.einsum('bchwij,bohw->ocij', windows, grad, optimize=True),
            'bias': grad.sum(axis=(0, 2, 3)),
        }
        padded = np.pad(grad, ((0, 0), (0, 0), (k - 1, k - 1), (k - 1, k - 1)))
        grad_windows = sliding_window_view(padded, (k, k), axis=(2, 3))
        flipped = params['weight'][:, :, ::-1, ::-1]
        return np.einsum('bohwij,ocij->bchw', grad_windows, flipped, optimize=True), grads

    def __repr__(self):
        return 'Conv2d %d -> %d, %dx%d' % (self.in_channels, self.out_channels, self.kernel_size, self.kernel_size)


class ReLU(Layer):

    def forward(self, params, x, training, rng):
        mask = x > 0
        return x * mask, mask

    def backward(self, params, cache, grad):
        return grad * cache, {}


class MaxPool2d(Layer):
    """
    non-overlapping windows, trailing rows/columns that do not fill a window are dropped,
    the gradient goes to the first maximum of each window
    """

    def __init__(self, size=2):
        self.size = size

    def output_shape(self, shape):
        channels, height, width = shape
        if height < self.size or width < self.size:
            raise ConfigError('Input %dx%d is smaller than the pooling window %d.' % (height, width, self.size))
        return channels, height // self.size, width // self.size

    def forward(self, params, x, training, rng):
        s = self.size
        batch, channels, height, width = x.shape
        h, w = height // s, width // s
        cropped = x[:, :, :h * s, :w * s]
        blocks = cropped.reshape(batch, channels, h, s, w, s).transpose(0, 1, 2, 4, 3, 5).reshape(batch, channels, h, w, s * s)
        winner = np.argmax(blocks, axis=-1)
        out = np.take_along_axis(blocks, winner[..., None], axis=-1)[..., 0]
        return out, (x.shape, winner)

    def backward(self, params, cache, grad):
        s = self.size
        shape, winner = cache
        batch, channels, height, width = shape
        h, w = winner.shape[2], winner.shape[3]
        blocks = np.zeros((batch, channels, h, w, s * s), dtype=grad.dtype)
        np.put_along_axis(blocks, winner[..., None], grad[..., None], axis=-1)
        dx = np.zeros(shape, dtype=grad.dtype)
        dx[:, :, :h * s, :w * s] = blocks.reshape(batch, channels, h, w, s, s).transpose(0, 1, 2, 4, 3, 5).reshape(
            batch, channels, h * s, w * s)
        return dx, {}

    def __repr__(self):
        return 'MaxPool2d %dx%d' % (self.size, self.size)


class Dropout(Layer):
    """
    inverted dropout, eval mode is the identity
    """

    def __init__(self, p):
        if not 0.0 <= p < 1.0:
            raise ConfigError('Dropout probability must be in [0, 1), got %r.' % p)
        self.p = p

    def forward(self, params, x, training, rng):
        if not training or self.p == 0.0:
            return x, None
        if rng is None:
            raise ConfigError('Training mode dropout needs a seeded generator.')
        mask = (rng.random(x.shape) >= self.p) / (1.0 - self.p)
        return x * mask, mask

    def backward(self, params, cache, grad):
        if cache is None:
            return grad, {}
        return grad * cache, {}

    def __repr__(self):
        return 'Dropout p=%g' % self.p


class Flatten(Layer):

    def output_shape(self, shape):
        return (int(np.prod(shape)),)

    def forward(self, params, x, training, rng):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, params, cache, grad):
        return grad.reshape(cache), {}


class Dense(Layer):

    def __init__(self, in_features, out_features):
        if min(in_features, out_features) < 1:
            raise ConfigError('Dense sizes must be positive.')
        self.in_features = in_features
        self.out_features = out_features

    def parameters(self, rng):
        return {
            'weight': uniform_init(rng, self.in_features, (self.out_features, self.in_features)),
            'bias': uniform_init(rng, self.in_features, (self.out_features,)),
        }

    def output_shape(self, shape):
        if shape != (self.in_features,):
            raise ConfigError('Dense layer expects %d features, got shape %s.' % (self.in_features, shape))
        return (self.out_features,)

    def forward(self, params, x, training, rng):
        return x @ params['weight'].T + params['bias'], x

    def backward(self, params, cache, grad):
        grads = {'weight': grad.T @ cache, 'bias': grad.sum(axis=0)}
        return grad @ params['weight'], grads

    def __repr__(self):
        return 'Dense %d -> %d' % (self.in_features, self.out_features)


class LogSoftmax(Layer):

    def forward(self, params, x, training, rng):
        out = x - logsumexp(x, axis=1, keepdims=True)
        return out, out

    def backward(self, params, cache, grad):
        return grad - np.exp(cache) * grad.sum(axis=1, keepdims=True), {}


def nll_loss(log_probs, targets):
    """
    mean negative log-likelihood of the targets and its gradient

    :param log_probs: (batch, classes)
    :param targets: (batch,) int class labels
    :return: (loss, gradient with respect to log_probs)
    """
    targets = np.asarray(targets, dtype=np.int64)
    batch, classes = log_probs.shape
    if targets.shape != (batch,):
        raise DataError('%d targets for a batch of %d.' % (targets.size, batch))
    if batch == 0:
        raise ConfigError('Loss of an empty batch.')
    if targets.min() < 0 or targets.max() >= classes:
        raise DataError('Class label outside [0, %d).' % classes)
    rows = np.arange(batch)
    loss = -float(np.mean(log_probs[rows, targets]))
    grad = np.zeros_like(log_probs)
    grad[rows, targets] = -1.0 / batch
    return loss, grad
