"""
配置管理模块，统一处理YAML格式的配置文件。

此模块负责:
1. 加载配置文件 (config-neural-scl.yaml)
2. 提供配置项访问接口
3. 确保配置一致性和默认值
4. 统一管理日志系统
"""

import copy
import os
import logging
import argparse
from pathlib import Path
from typing import Dict, Any, Optional
from logging.handlers import RotatingFileHandler

import yaml
from dotenv import load_dotenv

# 配置文件的默认路径
DEFAULT_CONFIG_FILENAME = "config-neural-scl.yaml"

# 环境变量
ENV_DATA_DIR = "NEURAL_SCL_DATA_DIR"
ENV_LOG_LEVEL = "NEURAL_SCL_LOG_LEVEL"

# 创建根日志记录器
logger = logging.getLogger('neural_scl')

DEFAULT_CONFIG: Dict[str, Any] = {
    'data': {
        'dir': 'data',
        'format': None,  # processed 或 tsv；为空时按文件名自动判断
    },
    'featurize': {
        'min_df': 5,
    },
    'pivot': {
        'strategy': 'mi_source',
        'p': 100,
        'candidate_min_df': 10,
    },
    'train': {
        'd': 2000,
        'lambda': 100.0,
        'rho': 0.1,
        'lr': 0.001,
        'epochs': 30,
        'batch_size': 50,
        'seed': 0,
        'mask_pivots_in_input': False,
        'validation_metric': 'task_bce',
        'use_bias': False,
        'debug_checks': False,
        'progress': True,
        'adam': {
            'beta1': 0.9,
            'beta2': 0.999,
            'epsilon': 1e-8,
        },
    },
    'aescl': {
        'hidden': 100,
        'activation': 'sigmoid',
        'use_bias': True,
        'rho': 0.0,
        'lr': 0.001,
        'epochs': 10,
        'batch_size': 50,
        'holdout_fraction': 0.2,
    },
    'classic_scl': {
        'k': 50,
        'rho': 0.1,
        'lr': 0.01,
        'epochs': 5,
        'batch_size': 50,
    },
    'logreg': {
        'rho': 0.1,
        'lr': 0.01,
        'epochs': 30,
        'batch_size': 50,
    },
    'benchmark': {
        'domains': ['books', 'dvd', 'electronics', 'kitchen'],
        'systems': ['logreg', 'aescl', 'joint_mi', 'joint_oracle'],
        'seeds': 10,
        'train_size': 1600,
        'validation_size': 400,
        'freeze_split': False,
        'comparisons': [
            ['joint_mi', 'aescl'],
            ['joint_mi', 'logreg'],
            ['joint_mi', 'joint_random'],
            ['joint_oracle', 'joint_mi'],
        ],
        'significance': 0.05,
        'jobs': 1,
    },
    'synthetic': {
        'general_terms': 40,
        'specific_terms': 60,
        'noise_terms': 500,
        'labeled_per_domain': 1000,
        'unlabeled_per_domain': 2000,
        'words_per_doc': 30,
        'signal_strength': 0.8,
    },
    'logging': {
        'path': 'logs',
        'level': 'INFO',
        'max_size': 10485760,  # 10MB
        'backup_count': 5,
        'format': '%(asctime)s [%(levelname)s] %(name)s: %(message)s',
        'date_format': '%Y-%m-%d %H:%M:%S',
    },
}


class ConfigManager:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(ConfigManager, cls).__new__(cls)
        return cls._instance

    def __init__(self):
        if not hasattr(self, '_config'):
            self._config = copy.deepcopy(DEFAULT_CONFIG)
            self.loaded_files = []
            # 读取 .env 文件中的环境变量
            load_dotenv()
            # 加载配置文件（按优先级从低到高）
            self._load_config_files()
            # 环境变量优先于配置文件
            self._apply_environment()

    def _load_config_files(self):
        """加载所有配置文件，按优先级从低到高"""
        config_paths = []

        # 1. 检查当前目录的配置文件
        current_dir_config = os.path.join(os.getcwd(), DEFAULT_CONFIG_FILENAME)
        if os.path.exists(current_dir_config):
            config_paths.append(current_dir_config)

        # 2. 检查项目配置目录
        project_config = os.path.join("config", DEFAULT_CONFIG_FILENAME)
        if os.path.exists(project_config):
            config_paths.append(project_config)

        # 3. 检查用户配置目录
        user_config = os.path.join(str(Path.home()), ".config", "neural-scl", "config.yaml")
        if os.path.exists(user_config):
            logger.debug(f'找到用户配置: {user_config}')
            config_paths.append(user_config)

        # 4. 检查命令行参数中的配置文件路径
        parser = argparse.ArgumentParser(add_help=False)
        parser.add_argument('--config', type=str)
        try:
            args, _ = parser.parse_known_args()
            if args.config and os.path.exists(args.config):
                config_paths.append(args.config)
        except SystemExit:
            logger.warning("解析命令行参数时出错，忽略 --config")

        for config_path in config_paths:
            self.load_config(config_path)

    def _apply_environment(self):
        """用环境变量覆盖配置"""
        data_dir = os.environ.get(ENV_DATA_DIR)
        if data_dir:
            self._config['data']['dir'] = data_dir
        log_level = os.environ.get(ENV_LOG_LEVEL)
        if log_level:
            self._config['logging']['level'] = log_level.upper()

    def load_config(self, config_path: str) -> None:
        """从指定路径加载配置文件"""
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                loaded_config = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            logger.warning(f"加载配置文件失败 {config_path}: {e}")
            return
        if loaded_config:
            if not isinstance(loaded_config, dict):
                logger.warning(f"配置文件顶层必须是映射: {config_path}")
                return
            self._update_config(loaded_config)
            self.loaded_files.append(str(config_path))
            logger.debug(f"成功加载配置文件: {config_path}")
        self._apply_environment()

    def _update_config(self, new_config: Dict[str, Any]) -> None:
        """递归更新配置"""
        def update_dict(base: Dict[str, Any], update: Dict[str, Any]) -> None:
            for key, value in update.items():
                if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                    update_dict(base[key], value)
                else:
                    base[key] = value

        update_dict(self._config, new_config)

    def set(self, key: str, value: Any) -> None:
        """按点分路径设置配置值，命令行参数通过它覆盖文件中的值"""
        keys = key.split('.')
        node = self._config
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value

    def get(self, key: str, default: Any = None) -> Any:
        """获取配置值"""
        keys = key.split('.')
        value = self._config
        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def reset(self) -> None:
        """恢复默认配置（测试中使用）"""
        self._config = copy.deepcopy(DEFAULT_CONFIG)
        self.loaded_files = []
        self._apply_environment()

    def setup_logging(self, console: bool = True) -> None:
        """设置日志系统"""
        log_config = self.get('logging', {})
        log_path = os.path.expanduser(log_config.get('path', 'logs'))
        log_level = str(log_config.get('level', 'INFO')).upper()
        max_size = log_config.get('max_size', 10485760)
        backup_count = log_config.get('backup_count', 5)
        log_format = log_config.get('format', '%(asctime)s [%(levelname)s] %(name)s: %(message)s')
        date_format = log_config.get('date_format', '%Y-%m-%d %H:%M:%S')

        # 确保日志目录存在
        os.makedirs(log_path, exist_ok=True)

        logger.setLevel(getattr(logging, log_level, logging.INFO))
        logger.handlers.clear()
        logger.propagate = False

        file_handler = RotatingFileHandler(
            os.path.join(log_path, 'neural_scl.log'),
            maxBytes=max_size,
            backupCount=backup_count,
            encoding='utf-8',
        )
        file_handler.setFormatter(logging.Formatter(log_format, date_format))
        logger.addHandler(file_handler)

        if console:
            console_handler = logging.StreamHandler()
            console_handler.setFormatter(logging.Formatter(log_format, date_format))
            logger.addHandler(console_handler)

        logger.debug("日志系统初始化完成")


def get_data_dir() -> str:
    """获取数据目录（环境变量 NEURAL_SCL_DATA_DIR 优先）"""
    return os.path.expanduser(str(ConfigManager().get('data.dir', 'data')))
