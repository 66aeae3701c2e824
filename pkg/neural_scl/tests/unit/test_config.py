import os
import tempfile
import unittest
from dataclasses import replace
from unittest import mock

from neural_scl.config import (
    AESCLConfig,
    BenchmarkConfig,
    ClassicSCLConfig,
    LogRegConfig,
    TrainConfig,
    config_hash,
)
from neural_scl.utils.config_manager import ENV_DATA_DIR, ConfigManager
from neural_scl.utils.errors import ConfigError


class ConfigTestCase(unittest.TestCase):
    """每个测试前后恢复默认配置"""

    def setUp(self):
        self.manager = ConfigManager()
        self.manager.reset()
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.manager.reset()
        self.tmp.cleanup()

    def write_yaml(self, text):
        path = os.path.join(self.tmp.name, 'config.yaml')
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        return path


class TestConfigManager(ConfigTestCase):
    """测试配置管理器"""

    def test_singleton(self):
        self.assertIs(ConfigManager(), self.manager)

    def test_dotted_get_and_set(self):
        self.assertEqual(self.manager.get('train.adam.beta2'), 0.999)
        self.assertEqual(self.manager.get('train.missing', 'x'), 'x')
        self.manager.set('train.epochs', 3)
        self.assertEqual(self.manager.get('train.epochs'), 3)
        self.manager.set('extra.nested.key', True)
        self.assertTrue(self.manager.get('extra.nested.key'))

    def test_load_merges_sections(self):
        path = self.write_yaml("train:\n  d: 16\n  adam:\n    beta1: 0.5\n")
        self.manager.load_config(path)
        self.assertEqual(self.manager.get('train.d'), 16)
        self.assertEqual(self.manager.get('train.adam.beta1'), 0.5)
        self.assertEqual(self.manager.get('train.adam.beta2'), 0.999)
        self.assertIn(path, self.manager.loaded_files)

    def test_broken_yaml_ignored(self):
        path = self.write_yaml("train: [unclosed\n")
        self.manager.load_config(path)
        self.assertEqual(self.manager.loaded_files, [])
        self.assertEqual(self.manager.get('train.d'), 2000)

    def test_environment_data_dir(self):
        with mock.patch.dict(os.environ, {ENV_DATA_DIR: '/srv/reviews'}):
            self.manager.reset()
            self.assertEqual(self.manager.get('data.dir'), '/srv/reviews')


class TestTypedConfigs(ConfigTestCase):
    """测试类型化配置的构造与校验"""

    def test_defaults(self):
        cfg = TrainConfig.from_config(self.manager)
        self.assertEqual((cfg.d, cfg.p, cfg.lam, cfg.rho, cfg.epochs, cfg.batch_size), (2000, 100, 100.0, 0.1, 30, 50))
        self.assertEqual(ClassicSCLConfig.from_config(self.manager).k, 50)
        self.assertEqual(AESCLConfig.from_config(self.manager).activation, 'sigmoid')

    def test_sections_and_overrides(self):
        self.manager.set('train.lambda', 10)
        self.manager.set('pivot.p', 40)
        cfg = TrainConfig.from_config(self.manager, epochs=2, d=None)
        self.assertEqual(cfg.lam, 10.0)
        self.assertEqual(cfg.p, 40)
        self.assertEqual(cfg.epochs, 2)
        self.assertEqual(cfg.d, 2000)

    def test_logreg_seed_from_train_section(self):
        self.manager.set('train.seed', 7)
        self.assertEqual(LogRegConfig.from_config(self.manager).seed, 7)

    def test_benchmark_overrides(self):
        self.manager.set('featurize.min_df', 2)
        cfg = BenchmarkConfig.from_config(self.manager, domains='books,dvd', systems=['logreg'], seeds=2)
        self.assertEqual(cfg.domains, ('books', 'dvd'))
        self.assertEqual(cfg.systems, ('logreg',))
        self.assertEqual(cfg.min_df, 2)
        self.assertEqual(cfg.comparisons[0], ('joint_mi', 'aescl'))

    def test_invalid_values(self):
        with self.assertRaises(ConfigError):
            TrainConfig(d=0)
        with self.assertRaises(ConfigError):
            TrainConfig(lam=-1.0)
        with self.assertRaises(ConfigError):
            TrainConfig(validation_metric='accuracy')
        with self.assertRaises(ConfigError):
            AESCLConfig(activation='tanh')
        self.manager.set('train.epochs', 'many')
        with self.assertRaises(ConfigError):
            TrainConfig.from_config(self.manager)

    def test_hash(self):
        cfg = TrainConfig()
        self.assertEqual(config_hash(cfg), config_hash(replace(cfg, progress=True)))
        self.assertNotEqual(config_hash(cfg), config_hash(cfg.with_seed(1)))
        self.assertNotEqual(config_hash(cfg), config_hash(cfg, LogRegConfig()))
        self.assertEqual(len(config_hash(cfg)), 12)


if __name__ == '__main__':
    unittest.main()
