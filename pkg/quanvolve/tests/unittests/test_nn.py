import sys, os
project_home = os.path.abspath(os.path.join(os.path.dirname(__file__), '../../../'))
if project_home not in sys.path:
    sys.path.insert(0, project_home)

import itertools
import shutil
import tempfile
import unittest

import mock
import numpy as np
from scipy import signal

from quanvolve.exceptions import ConfigError, DataError
from quanvolve.nn.layers import Conv2d, MaxPool2d, Dropout, Dense, LogSoftmax, nll_loss
from quanvolve.nn.model import Model, ModelSpec, build_model, save_run, load_run, gradient_check
from quanvolve.nn.optim import Adam, AdamState, adam_step
from quanvolve.nn.train import TrainConfig, train, evaluate


def tiny_spec(in_channels=2, n_classes=3, size=7, dropout=0.0):
    return ModelSpec(in_channels=in_channels, n_classes=n_classes, height=size, width=size,
                     conv_channels=3, kernel_size=3, pool=2, dense_units=5, dropout=dropout)


def bright_dark(n=40, size=8, seed=0):
    """ class 1 images are bright, class 0 images are dark """
    rng = np.random.RandomState(seed)
    labels = np.arange(n) % 2
    inputs = rng.rand(n, 1, size, size) * 0.4 + 0.6 * labels[:, None, None, None]
    return inputs, labels


class test_layers(unittest.TestCase):

    def test_conv_matches_correlate(self):
        rng = np.random.default_rng(0)
        conv = Conv2d(2, 3, 3)
        params = conv.parameters(rng)
        x = rng.random((2, 2, 6, 5))
        out, _ = conv.forward(params, x, False, None)
        self.assertEqual(out.shape, (2, 3, 4, 3))
        self.assertEqual(conv.output_shape((2, 6, 5)), (3, 4, 3))
        expected = sum(signal.correlate2d(x[1, c], params['weight'][2, c], mode='valid') for c in range(2))
        np.testing.assert_allclose(out[1, 2], expected + params['bias'][2], atol=1e-12)

    def test_init_bounds(self):
        params = Dense(16, 4).parameters(np.random.default_rng(1))
        self.assertTrue(np.all(np.abs(params['weight']) <= 0.25))
        self.assertEqual(params['weight'].shape, (4, 16))
        params = Conv2d(1, 8, 3).parameters(np.random.default_rng(1))
        self.assertTrue(np.all(np.abs(params['weight']) <= 1.0 / 3.0))

    def test_maxpool(self):
        pool = MaxPool2d(2)
        x = np.arange(25, dtype=np.float64).reshape(1, 1, 5, 5)
        out, cache = pool.forward({}, x, False, None)
        self.assertEqual(out[0, 0].tolist(), [[6.0, 8.0], [16.0, 18.0]])
        dx, _ = pool.backward({}, cache, np.ones((1, 1, 2, 2)))
        self.assertEqual(dx.shape, (1, 1, 5, 5))
        self.assertEqual(dx.sum(), 4.0)
        self.assertEqual(dx[0, 0, 1, 1], 1.0)
        self.assertEqual(dx[0, 0, 4].tolist(), [0.0] * 5)

    def test_dropout(self):
        dropout = Dropout(0.5)
        x = np.ones((4, 100))
        out, cache = dropout.forward({}, x, False, None)
        self.assertIs(out, x)
        self.assertIsNone(cache)
        out, mask = dropout.forward({}, x, True, np.random.default_rng(0))
        self.assertTrue(set(np.unique(out)).issubset({0.0, 2.0}))
        self.assertAlmostEqual(out.mean(), 1.0, delta=0.15)
        with self.assertRaises(ConfigError):
            dropout.forward({}, x, True, None)
        with self.assertRaises(ConfigError):
            Dropout(1.0)

    def test_log_softmax_and_loss(self):
        out, _ = LogSoftmax().forward({}, np.array([[1.0, 2.0, 3.0], [1000.0, 0.0, 0.0]]), False, None)
        np.testing.assert_allclose(np.exp(out).sum(axis=1), [1.0, 1.0])
        loss, grad = nll_loss(out, [2, 0])
        self.assertAlmostEqual(loss, -(out[0, 2] + out[1, 0]) / 2.0)
        self.assertEqual(grad[0].tolist(), [0.0, 0.0, -0.5])
        with self.assertRaises(DataError):
            nll_loss(out, [3, 0])
        with self.assertRaises(DataError):
            nll_loss(out, [0])


class test_model(unittest.TestCase):

    def test_shapes(self):
        model = build_model(tiny_spec(), 0)
        log_probs, _ = model.forward(np.random.default_rng(0).random((4, 2, 7, 7)))
        self.assertEqual(log_probs.shape, (4, 3))
        # 7x7 -> conv 5x5 -> pool 2x2
        self.assertEqual(model.params['dense1.weight'].shape, (5, 3 * 2 * 2))
        self.assertEqual(model.params['dense2.weight'].shape, (3, 5))

    def test_gradient_check(self):
        """ every layer, dropout included with its mask replayed, over ten seeds """
        for seed in range(10):
            model = build_model(tiny_spec(dropout=0.3), seed)
            batch = np.random.default_rng(100 + seed).random((3, 2, 7, 7))
            targets = [seed % 3, (seed + 1) % 3, (seed + 2) % 3]
            self.assertLess(gradient_check(model, batch, targets, step=1e-6), 1e-4)
            self.assertLess(gradient_check(model, batch, targets, step=1e-6, mode='train', seed=seed), 1e-4)

    def test_gradient_check_sees_dropout(self):
        """ a backward that ignores the dropout mask is caught in train mode only """
        model = build_model(tiny_spec(dropout=0.5), 1)
        batch = np.random.default_rng(2).random((2, 2, 7, 7))
        with mock.patch.object(Dropout, 'backward', lambda self, params, cache, grad: (grad, {})):
            self.assertLess(gradient_check(model, batch, [0, 1], step=1e-6), 1e-4)
            self.assertGreater(gradient_check(model, batch, [0, 1], step=1e-6, mode='train', seed=3), 1e-2)

    def test_same_seed_same_model(self):
        a, b = build_model(tiny_spec(), 7), build_model(tiny_spec(), 7)
        for key in a.params:
            np.testing.assert_array_equal(a.params[key], b.params[key])
        c = build_model(tiny_spec(), 8)
        self.assertFalse(np.array_equal(a.params['conv.weight'], c.params['conv.weight']))

    def test_stale_cache(self):
        model = build_model(tiny_spec(), 0)
        batch = np.zeros((2, 2, 7, 7))
        log_probs, cache = model.forward(batch)
        model.update(dict(model.params))
        with self.assertRaises(DataError):
            model.backward(cache, [0, 1], log_probs)

    def test_errors(self):
        with self.assertRaises(ConfigError):
            build_model(tiny_spec(n_classes=1), 0)
        with self.assertRaises(ConfigError):
            Model(tiny_spec())
        model = build_model(tiny_spec(), 0)
        with self.assertRaises(DataError):
            model.forward(np.zeros((2, 1, 7, 7)))
        with self.assertRaises(ConfigError):
            model.forward(np.zeros((2, 2, 7, 7)), mode='test')
        params = dict(model.params)
        del params['dense2.bias']
        with self.assertRaises(DataError):
            Model(tiny_spec(), params=params)
        with self.assertRaises(DataError):
            model.update({'dense2.bias': np.zeros(4)})

    def test_predict_ties(self):
        model = build_model(tiny_spec(), 0)
        for key in model.params:
            model.params[key] = np.zeros_like(model.params[key])
        self.assertEqual(model.predict(np.ones((3, 2, 7, 7))).tolist(), [0, 0, 0])

    def test_save_load_run(self):
        model = build_model(tiny_spec(), 5)
        tmpdir = tempfile.mkdtemp()
        try:
            filename = os.path.join(tmpdir, 'run.json')
            save_run(filename, model, {'seed': 5}, [{'epoch': 1, 'loss': 0.5}], {'accuracy': 0.75})
            loaded, config, history, summary = load_run(filename)
            self.assertEqual(loaded.spec, model.spec)
            for key in model.params:
                np.testing.assert_array_equal(loaded.params[key], model.params[key])
            self.assertEqual(config, {'seed': 5})
            self.assertEqual(history, [{'epoch': 1, 'loss': 0.5}])
            self.assertEqual(summary, {'accuracy': 0.75})
            with open(filename, 'w') as f:
                f.write('{"config": {}}')
            with self.assertRaises(DataError):
                load_run(filename)
            with self.assertRaises(DataError):
                load_run(os.path.join(tmpdir, 'missing.json'))
        finally:
            shutil.rmtree(tmpdir)


class test_optim(unittest.TestCase):

    def test_first_step(self):
        """ the bias-corrected first step moves every parameter by about lr against its gradient sign """
        params = {'w': np.array([1.0, -2.0, 0.5])}
        grads = {'w': np.array([0.3, -4.0, 0.0])}
        state = AdamState()
        updated = adam_step(params, grads, state, lr=0.01)
        np.testing.assert_allclose(updated['w'], [0.99, -1.99, 0.5], atol=1e-7)
        self.assertEqual(state.step, 1)
        np.testing.assert_allclose(state.m['w'], 0.1 * grads['w'])

    def test_second_step(self):
        params = {'w': np.array([1.0])}
        state = AdamState()
        params = adam_step(params, {'w': np.array([1.0])}, state, lr=0.1)
        params = adam_step(params, {'w': np.array([3.0])}, state, lr=0.1)
        m = (0.9 * 0.1 + 0.3) / (1 - 0.81)
        v = (0.999 * 0.001 + 0.009) / (1 - 0.999 ** 2)
        first = 1.0 - 0.1 / (1.0 + 1e-8)
        self.assertAlmostEqual(params['w'][0], first - 0.1 * m / (np.sqrt(v) + 1e-8), places=10)

    def test_errors(self):
        with self.assertRaises(ConfigError):
            adam_step({'w': np.zeros(1)}, {'w': np.zeros(1)}, AdamState(), lr=0.0)
        with self.assertRaises(DataError):
            adam_step({'w': np.zeros(1)}, {'v': np.zeros(1)}, AdamState())
        with self.assertRaises(DataError):
            adam_step({'w': np.zeros(1)}, {'w': np.zeros(2)}, AdamState())

    def test_optimizer_bumps_version(self):
        model = build_model(tiny_spec(), 0)
        grads = dict((key, np.ones_like(value)) for key, value in model.params.items())
        Adam(lr=0.001).step(model, grads)
        self.assertEqual(model.version, 1)


class test_train(unittest.TestCase):

    def test_config(self):
        cfg = TrainConfig.from_config(seed=3, lr=None, batch_size=4)
        self.assertEqual((cfg.seed, cfg.batch_size), (3, 4))
        self.assertEqual(cfg.lr, 0.0003)
        self.assertEqual(TrainConfig.from_config(alpha='rndlin').patience, 100)
        self.assertEqual(TrainConfig.from_config(alpha='simple').patience, 10)
        for bad in [{'lr': 0.0}, {'batch_size': 0}, {'patience': 0}, {'max_epochs': 0}]:
            with self.assertRaises(ConfigError):
                TrainConfig(**bad)

    def test_patience(self):
        """ a loss that never improves stops training after patience epochs past the first """
        model = build_model(tiny_spec(in_channels=1, n_classes=2, size=8), 0)
        inputs, labels = bright_dark(10)
        cfg = TrainConfig(batch_size=5, patience=3, max_epochs=50)
        with mock.patch.object(Model, 'backward', return_value=(1.0, {})), \
                mock.patch('quanvolve.nn.train.Adam') as adam:
            _, history = train(model, inputs, labels, cfg)
        self.assertEqual([h['epoch'] for h in history], [1, 2, 3, 4])
        self.assertEqual(adam.return_value.step.call_count, 4 * 2)

    def test_max_epochs(self):
        model = build_model(tiny_spec(in_channels=1, n_classes=2, size=8), 0)
        inputs, labels = bright_dark(10)
        counter = itertools.count(1)
        with mock.patch.object(Model, 'backward', side_effect=lambda *args: (1.0 / next(counter), {})), \
                mock.patch('quanvolve.nn.train.Adam'):
            _, history = train(model, inputs, labels, TrainConfig(batch_size=10, patience=2, max_epochs=6))
        self.assertEqual(len(history), 6)

    def test_learns_separable(self):
        inputs, labels = bright_dark(40)
        model = build_model(tiny_spec(in_channels=1, n_classes=2, size=8), 1)
        model, history = train(model, inputs, labels, TrainConfig(lr=0.01, batch_size=8, patience=50, max_epochs=40))
        self.assertLess(history[-1]['loss'], history[0]['loss'])
        self.assertGreaterEqual(evaluate(model, inputs, labels), 0.9)

    def test_deterministic(self):
        inputs, labels = bright_dark(12)
        spec = tiny_spec(in_channels=1, n_classes=2, size=8, dropout=0.2)
        cfg = TrainConfig(lr=0.01, batch_size=4, patience=5, max_epochs=3, seed=9)
        first, first_history = train(build_model(spec, 2), inputs, labels, cfg)
        second, second_history = train(build_model(spec, 2), inputs, labels, cfg)
        self.assertEqual(first_history, second_history)
        for key in first.params:
            np.testing.assert_array_equal(first.params[key], second.params[key])

    def test_dataset_errors(self):
        model = build_model(tiny_spec(in_channels=1, n_classes=2, size=8), 0)
        inputs, labels = bright_dark(4)
        with self.assertRaises(DataError):
            train(model, inputs, labels[:3], TrainConfig(max_epochs=1))
        with self.assertRaises(DataError):
            evaluate(model, inputs, labels + 2)
        with self.assertRaises(ConfigError):
            evaluate(model, inputs[:0], labels[:0])


if __name__ == '__main__':
    unittest.main()
