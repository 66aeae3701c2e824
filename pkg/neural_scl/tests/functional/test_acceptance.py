"""
合成双领域上的端到端对比实验

耗时较长，设置 NEURAL_SCL_RUN_SLOW=1 时才运行。
"""

import os
import unittest

from neural_scl.config import AESCLConfig, BenchmarkConfig, ClassicSCLConfig, LogRegConfig, SyntheticConfig, TrainConfig
from neural_scl.core.benchmark import run_benchmark
from neural_scl.core.selfcheck import gradient_check_suite, mi_oracle_suite, svd_suite, welch_suite
from neural_scl.core.synthetic import generate_synthetic_domains

RUN_SLOW = os.environ.get('NEURAL_SCL_RUN_SLOW') == '1'

TRAIN = TrainConfig(d=100, p=40, epochs=10)
ORACLE_TOLERANCE = 0.005


def synthetic_benchmark(systems, seeds):
    data = generate_synthetic_domains(SyntheticConfig(), seed=0)
    cfg = BenchmarkConfig(domains=('alpha', 'beta'), systems=systems, seeds=seeds, train_size=800,
                          validation_size=200, min_df=5, candidate_min_df=10, jobs=os.cpu_count() or 1)
    return run_benchmark(data, cfg, TRAIN, AESCLConfig(hidden=100), ClassicSCLConfig(k=20),
                         LogRegConfig())


@unittest.skipUnless(RUN_SLOW, '设置 NEURAL_SCL_RUN_SLOW=1 运行耗时测试')
class TestSelfCheckSuites(unittest.TestCase):
    """完整规模的数值自检"""

    def test_gradient(self):
        self.assertTrue(gradient_check_suite(trials=100).passed)

    def test_mutual_information(self):
        result = mi_oracle_suite(max_count=6)
        self.assertTrue(result.passed)
        self.assertEqual(result.trials, 7 ** 4 - 1)

    def test_svd(self):
        self.assertTrue(svd_suite(trials=50).passed)

    def test_welch(self):
        self.assertTrue(welch_suite(trials=50).passed)


@unittest.skipUnless(RUN_SLOW, '设置 NEURAL_SCL_RUN_SLOW=1 运行耗时测试')
class TestSyntheticAdaptation(unittest.TestCase):
    """合成领域上的系统排序"""

    @classmethod
    def setUpClass(cls):
        cls.result = synthetic_benchmark(('logreg', 'aescl', 'classic_scl', 'joint_mi', 'joint_oracle'), seeds=5)

    def average(self, system):
        return self.result.system_average(system)

    def test_joint_beats_source_only(self):
        self.assertGreaterEqual(self.average('joint_mi') - self.average('logreg'), 0.05)

    def test_joint_not_worse_than_aescl(self):
        self.assertGreaterEqual(self.average('joint_mi'), self.average('aescl'))

    def test_oracle_pivots(self):
        # 共享词方向一致时两种策略的枢纽集合几乎相同，差异只来自枢纽排序
        self.assertGreaterEqual(self.average('joint_oracle'), self.average('joint_mi') - ORACLE_TOLERANCE)

    def test_baselines_not_worse_than_source_only(self):
        self.assertGreaterEqual(self.average('aescl'), self.average('logreg'))
        self.assertGreaterEqual(self.average('classic_scl'), self.average('logreg'))


@unittest.skipUnless(RUN_SLOW, '设置 NEURAL_SCL_RUN_SLOW=1 运行耗时测试')
class TestRandomPivots(unittest.TestCase):
    """随机枢纽对照"""

    def test_random_pivots_underperform(self):
        result = synthetic_benchmark(('joint_mi', 'joint_random'), seeds=10)
        self.assertGreater(result.system_average('joint_mi'), result.system_average('joint_random'))


if __name__ == '__main__':
    unittest.main()
