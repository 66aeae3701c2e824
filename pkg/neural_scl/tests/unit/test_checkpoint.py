import os
import struct
import tempfile
import unittest

import numpy as np

from neural_scl.config import AESCLConfig, ClassicSCLConfig, LogRegConfig
from neural_scl.core.models import (
    AESCLModel,
    ClassicSCLModel,
    LogRegModel,
    TrainedJointModel,
    load_model,
    save_model,
    train_aescl,
    train_classic_scl,
    train_joint,
    train_logreg,
)
from neural_scl.tests.helpers import SMALL_TRAIN, small_pair
from neural_scl.utils.checkpoint import MAGIC, read_checkpoint, write_checkpoint
from neural_scl.utils.errors import CheckpointFormatError


class CheckpointTestCase(unittest.TestCase):
    """带临时目录的测试基类"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)


class TestCheckpointFormat(CheckpointTestCase):
    """测试检查点文件格式"""

    def test_round_trip(self):
        arrays = {'W': np.arange(6, dtype=float).reshape(2, 3), 'b': np.array([0.5])}
        write_checkpoint(self.path('m.ckpt'), 'joint', {'seed': 3, 'name': '模型'}, arrays)
        kind, meta, loaded = read_checkpoint(self.path('m.ckpt'))
        self.assertEqual(kind, 'joint')
        self.assertEqual(meta, {'seed': 3, 'name': '模型'})
        self.assertEqual(list(loaded), ['W', 'b'])
        np.testing.assert_array_equal(loaded['W'], arrays['W'])

    def test_byte_identical(self):
        arrays = {'W': np.random.default_rng(0).normal(size=(4, 5))}
        for name in ('a', 'b'):
            write_checkpoint(self.path(name), 'joint', {'z': 1, 'a': [1, 2]}, arrays)
        with open(self.path('a'), 'rb') as fa, open(self.path('b'), 'rb') as fb:
            self.assertEqual(fa.read(), fb.read())

    def test_header_layout(self):
        write_checkpoint(self.path('m'), 'logreg', {}, {'w': np.zeros((1, 2))})
        with open(self.path('m'), 'rb') as f:
            blob = f.read()
        self.assertEqual(blob[:4], MAGIC)
        version, length = struct.unpack('<II', blob[4:12])
        self.assertEqual(version, 1)
        self.assertEqual(len(blob), 12 + length + 16)

    def test_bad_magic(self):
        with open(self.path('m'), 'wb') as f:
            f.write(b'XXXX' + bytes(20))
        with self.assertRaises(CheckpointFormatError):
            read_checkpoint(self.path('m'))

    def test_unsupported_version(self):
        write_checkpoint(self.path('m'), 'logreg', {}, {'w': np.zeros((1, 2))})
        with open(self.path('m'), 'r+b') as f:
            f.seek(4)
            f.write(struct.pack('<I', 99))
        with self.assertRaises(CheckpointFormatError):
            read_checkpoint(self.path('m'))

    def test_truncated_data(self):
        write_checkpoint(self.path('m'), 'logreg', {}, {'w': np.ones((3, 3))})
        with open(self.path('m'), 'rb') as f:
            blob = f.read()
        with open(self.path('m'), 'wb') as f:
            f.write(blob[:-8])
        with self.assertRaises(CheckpointFormatError):
            read_checkpoint(self.path('m'))

    def test_trailing_bytes(self):
        write_checkpoint(self.path('m'), 'logreg', {}, {'w': np.ones((1, 1))})
        with open(self.path('m'), 'ab') as f:
            f.write(b'\x00')
        with self.assertRaises(CheckpointFormatError):
            read_checkpoint(self.path('m'))

    def test_non_finite_rejected(self):
        with self.assertRaises(CheckpointFormatError):
            write_checkpoint(self.path('m'), 'logreg', {}, {'w': np.array([np.inf])})

    def test_unknown_kind(self):
        write_checkpoint(self.path('m'), 'forest', {}, {})
        with self.assertRaises(CheckpointFormatError):
            load_model(self.path('m'))


class TestModelCheckpoints(CheckpointTestCase):
    """测试四种模型的保存与恢复"""

    @classmethod
    def setUpClass(cls):
        cls.prepared, cls.vocab, cls.pivots = small_pair()

    def assert_same_predictions(self, model, cls):
        path = self.path('model.ckpt')
        save_model(model, path)
        loaded = load_model(path)
        self.assertIsInstance(loaded, cls)
        X = self.prepared.target_test.X
        np.testing.assert_array_equal(loaded.predict_proba(X), model.predict_proba(X))
        return loaded

    def test_joint(self):
        p = self.prepared
        model = train_joint(p.train, p.validation, p.unlabeled, self.pivots, SMALL_TRAIN)
        loaded = self.assert_same_predictions(model, TrainedJointModel)
        self.assertEqual(loaded.best_epoch, model.best_epoch)
        self.assertEqual(loaded.pivots.indices, self.pivots.indices)
        self.assertEqual(loaded.config, SMALL_TRAIN)

    def test_joint_bytes_deterministic(self):
        p = self.prepared
        for name in ('a', 'b'):
            model = train_joint(p.train, p.validation, p.unlabeled, self.pivots, SMALL_TRAIN)
            save_model(model, self.path(name))
        with open(self.path('a'), 'rb') as fa, open(self.path('b'), 'rb') as fb:
            self.assertEqual(fa.read(), fb.read())

    def test_logreg(self):
        model = train_logreg(self.prepared.train, self.prepared.validation, LogRegConfig(epochs=2))
        self.assert_same_predictions(model, LogRegModel)

    def test_aescl(self):
        p = self.prepared
        model = train_aescl(p.train, p.validation, p.unlabeled, self.pivots,
                            AESCLConfig(hidden=4, epochs=1), LogRegConfig(epochs=2))
        self.assert_same_predictions(model, AESCLModel)

    def test_classic_scl(self):
        p = self.prepared
        model = train_classic_scl(p.train, p.unlabeled, self.pivots, k=2,
                                  cfg=ClassicSCLConfig(k=2, epochs=1), logreg_cfg=LogRegConfig(epochs=2))
        loaded = self.assert_same_predictions(model, ClassicSCLModel)
        self.assertEqual(loaded.k, 2)


if __name__ == '__main__':
    unittest.main()
