import sys, os
project_home = os.path.abspath(os.path.join(os.path.dirname(__file__), '../../../'))
if project_home not in sys.path:
    sys.path.insert(0, project_home)

import json
import shutil
import tempfile
import unittest

import numpy as np

from quanvolve.exceptions import ConfigError, DataError
from quanvolve.datareaders import IDXfile, CSVfile, RAWfile
from quanvolve.datareaders.common import Dataset, minmax_normalize, resize, box_weights, grayscale, prepare, \
    split_dataset
from quanvolve.datareaders.handler import verify, load_dataset, save_dataset
from quanvolve.datareaders.synthetic import make_dataset


def grid_dataset(count=5, size=6, seed=0):
    """ pixels on multiples of 1/255, so they survive the u8 idx encoding """
    rng = np.random.RandomState(seed)
    images = [rng.randint(0, 256, size=(size, size)) / 255.0 for _ in range(count)]
    return Dataset(images=images, labels=np.arange(count) % 3, name='grid')


class test_transforms(unittest.TestCase):

    def test_minmax(self):
        image = minmax_normalize([[2.0, 4.0], [6.0, 10.0]])
        self.assertEqual(image.tolist(), [[0.0, 0.25], [0.5, 1.0]])
        self.assertEqual(minmax_normalize(np.full((3, 3), 7.0)).tolist(), [[0.0] * 3] * 3)
        with self.assertRaises(DataError):
            minmax_normalize(np.zeros((0, 0)))

    def test_resize(self):
        image = np.arange(16, dtype=np.float64).reshape(4, 4)
        self.assertEqual(resize(image, 2).tolist(), [[2.5, 4.5], [10.5, 12.5]])
        np.testing.assert_array_equal(resize(image, 4), image)
        self.assertEqual(resize(image, 1).tolist(), [[7.5]])
        self.assertEqual(resize(image, 2, 4).shape, (2, 4))
        with self.assertRaises(ConfigError):
            resize(image, 8)
        with self.assertRaises(DataError):
            resize(np.zeros((2, 2, 2)), 1)

    def test_box_weights_fractional(self):
        weights = box_weights(3, 2)
        np.testing.assert_allclose(weights.sum(axis=1), [1.0, 1.0])
        np.testing.assert_allclose(weights, [[2.0 / 3, 1.0 / 3, 0.0], [0.0, 1.0 / 3, 2.0 / 3]])

    def test_resize_keeps_mean(self):
        image = np.random.RandomState(2).rand(30, 30)
        self.assertAlmostEqual(resize(image, 7).mean(), image.mean(), places=12)

    def test_grayscale(self):
        image = np.zeros((2, 2, 3))
        image[0, 0] = [1.0, 1.0, 1.0]
        image[1, 1] = [1.0, 0.0, 0.0]
        gray = grayscale(image)
        self.assertAlmostEqual(gray[0, 0], 1.0)
        self.assertAlmostEqual(gray[1, 1], 0.299)
        with self.assertRaises(DataError):
            grayscale(np.zeros((2, 2)))

    def test_prepare(self):
        rgb = np.random.RandomState(0).rand(8, 8, 3) * 3.0
        dataset = prepare(Dataset(images=[rgb, np.full((8, 8), 5.0)], labels=[1, 0]), size=4)
        self.assertEqual([image.shape for image in dataset.images], [(4, 4), (4, 4)])
        self.assertEqual((dataset.images[0].min(), dataset.images[0].max()), (0.0, 1.0))
        self.assertEqual(dataset.images[1].max(), 0.0)
        self.assertEqual(dataset.n_classes, 2)
        with self.assertRaises(DataError):
            prepare(Dataset(images=[np.full((2, 2), 3.0)], labels=[0]), normalize=False)

    def test_dataset_checks(self):
        with self.assertRaises(DataError):
            Dataset(images=[np.zeros((2, 2))], labels=[0, 1])
        with self.assertRaises(DataError):
            Dataset(images=[np.zeros((2, 2))], labels=[-1])
        dataset = Dataset(images=[np.zeros((2, 2)), np.zeros((3, 3))], labels=[0, 4])
        self.assertEqual(dataset.n_classes, 5)
        with self.assertRaises(DataError):
            dataset.as_array()

    def test_split(self):
        dataset = grid_dataset(10)
        train, test = split_dataset(dataset, 0.7, np.random.default_rng(0))
        self.assertEqual((len(train), len(test)), (7, 3))
        self.assertEqual((train.split, test.split), ('train', 'test'))
        self.assertEqual(sorted(train.labels.tolist() + test.labels.tolist()), sorted(dataset.labels.tolist()))
        with self.assertRaises(ConfigError):
            split_dataset(dataset, 1.0, np.random.default_rng(0))


class test_files(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_verify(self):
        self.assertIs(verify('csv'), CSVfile)
        self.assertIs(verify(None, 'data/train.csv'), CSVfile)
        self.assertIs(verify(None, 'data/train.raw'), RAWfile)
        self.assertIs(verify(None, 'data/train-images-idx3-ubyte'), IDXfile)
        self.assertIsNone(verify('png'))
        with self.assertRaises(ConfigError):
            load_dataset('data/train.png')

    def test_tiny_csv(self):
        stub = os.path.join(os.path.dirname(__file__), 'stubdata', 'tiny.csv')
        dataset = load_dataset(stub)
        self.assertEqual(len(dataset), 4)
        self.assertEqual(dataset.labels.tolist(), [0, 1, 0, 1])
        self.assertEqual(dataset.name, 'tiny.csv')
        self.assertEqual(dataset.images[0].tolist()[1], [0.5] * 4)
        # 0.25 and 0.75 are stretched to 0 and 1
        self.assertEqual(dataset.images[2].tolist()[0], [0.0] * 4)
        self.assertEqual(dataset.images[2].tolist()[1], [1.0] * 4)
        self.assertEqual(load_dataset(stub, size=2).images[0].shape, (2, 2))

    def test_csv_round_trip(self):
        dataset = grid_dataset()
        filename = os.path.join(self.tmpdir, 'data.csv')
        save_dataset(dataset, filename, 'csv')
        loaded = CSVfile.load(filename)
        self.assertEqual(loaded.labels.tolist(), dataset.labels.tolist())
        for a, b in zip(loaded.images, dataset.images):
            np.testing.assert_array_equal(a, b)

    def test_csv_errors(self):
        filename = os.path.join(self.tmpdir, 'bad.csv')
        for content in ['0,1,2,3,4,5\n', '0.5,1,1,1,1\n', '0,1,1,1,1\nx,1,1,1,1\n']:
            with open(filename, 'w') as f:
                f.write(content)
            with self.assertRaises(DataError):
                CSVfile.load(filename)
        with self.assertRaises(DataError):
            CSVfile.load(os.path.join(self.tmpdir, 'missing.csv'))

    def test_idx_round_trip(self):
        dataset = grid_dataset()
        filename = os.path.join(self.tmpdir, 'train-images-idx3-ubyte')
        images_path, labels_path = save_dataset(dataset, filename, 'idx')
        self.assertEqual(os.path.basename(labels_path), 'train-labels-idx1-ubyte')
        loaded = IDXfile.load(images_path)
        self.assertEqual(loaded.labels.tolist(), dataset.labels.tolist())
        for a, b in zip(loaded.images, dataset.images):
            np.testing.assert_allclose(a, b, atol=1e-12)
        with open(images_path, 'rb') as f:
            self.assertEqual(f.read(4), b'\x00\x00\x08\x03')

    def test_idx_types(self):
        filename = os.path.join(self.tmpdir, 'values.idx')
        array = np.arange(12, dtype=np.float32).reshape(3, 4)
        IDXfile.write_idx(filename, array)
        read = IDXfile.read_idx(filename)
        self.assertEqual(read.dtype, np.dtype('>f4'))
        np.testing.assert_array_equal(read, array)
        with self.assertRaises(DataError):
            IDXfile.write_idx(filename, np.zeros(2, dtype=np.complex64))

    def test_idx_truncated(self):
        dataset = grid_dataset()
        filename = os.path.join(self.tmpdir, 'train-images-idx3-ubyte')
        save_dataset(dataset, filename, 'idx')
        with open(filename, 'rb') as f:
            buffer = f.read()
        header = 4 + 3 * 4
        with open(filename, 'wb') as f:
            f.write(buffer[:-10])
        with self.assertRaises(DataError) as context:
            IDXfile.read_idx(filename)
        self.assertEqual(context.exception.offset, len(buffer) - 10)
        with open(filename, 'wb') as f:
            f.write(buffer[:6])
        with self.assertRaises(DataError) as context:
            IDXfile.read_idx(filename)
        self.assertEqual(context.exception.offset, 6)
        self.assertLess(context.exception.offset, header)
        with open(filename, 'wb') as f:
            f.write(b'\x01' + buffer[1:])
        with self.assertRaises(DataError) as context:
            IDXfile.read_idx(filename)
        self.assertEqual(context.exception.offset, 0)

    def test_idx_labels(self):
        dataset = grid_dataset()
        filename = os.path.join(self.tmpdir, 'images.idx')
        save_dataset(dataset, filename, 'idx')
        self.assertTrue(os.path.exists(filename + '.labels'))
        self.assertEqual(IDXfile.load(filename).labels.tolist(), dataset.labels.tolist())
        os.remove(filename + '.labels')
        with self.assertRaises(DataError):
            IDXfile.load(filename)
        IDXfile.write_idx(filename + '.labels', np.zeros(2, dtype=np.uint8))
        with self.assertRaises(DataError):
            IDXfile.load(filename)

    def test_raw_round_trip(self):
        dataset = Dataset(images=list(np.random.RandomState(3).rand(4, 3, 5)), labels=[0, 1, 1, 0])
        filename = os.path.join(self.tmpdir, 'data.raw')
        save_dataset(dataset, filename, 'raw')
        loaded = RAWfile.load(filename)
        self.assertEqual(loaded.labels.tolist(), [0, 1, 1, 0])
        for a, b in zip(loaded.images, dataset.images):
            np.testing.assert_array_equal(a, b)
        with open(filename + '.json') as f:
            self.assertEqual(json.load(f)['height'], 3)

    def test_raw_errors(self):
        dataset = Dataset(images=list(np.zeros((2, 2, 2))), labels=[0, 1])
        filename = os.path.join(self.tmpdir, 'data.raw')
        save_dataset(dataset, filename, 'raw')
        with open(filename, 'ab') as f:
            f.write(b'\x00' * 8)
        with self.assertRaises(DataError):
            RAWfile.load(filename)
        os.remove(filename + '.json')
        with self.assertRaises(DataError):
            RAWfile.load(filename)


class test_synthetic(unittest.TestCase):

    def test_make_dataset(self):
        dataset = make_dataset(7, 21, size=12, rng=np.random.default_rng(0))
        self.assertEqual(len(dataset), 21)
        self.assertEqual(dataset.n_classes, 7)
        self.assertEqual(sorted(np.bincount(dataset.labels).tolist()), [3] * 7)
        self.assertTrue(all(image.shape == (12, 12) for image in dataset.images))
        dataset.check_range()

    def test_seeded(self):
        a = make_dataset(2, 6, size=8, rng=np.random.default_rng(4))
        b = make_dataset(2, 6, size=8, rng=np.random.default_rng(4))
        self.assertEqual(a.labels.tolist(), b.labels.tolist())
        for x, y in zip(a.images, b.images):
            np.testing.assert_array_equal(x, y)

    def test_errors(self):
        with self.assertRaises(ConfigError):
            make_dataset(3, 6)
        with self.assertRaises(ConfigError):
            make_dataset(2, 6, size=3)


if __name__ == '__main__':
    unittest.main()
