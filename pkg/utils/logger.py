"""
统一日志管理模块
所有组件的日志都挂在 grid_broker 之下：grid_broker.gom、grid_broker.simulator ...
控制台日志输出到stderr，stdout只留给表格和CSV
"""
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
import config

ROOT_LOGGER = 'grid_broker'


def setup_logger(name: str = ROOT_LOGGER) -> logging.Logger:
    """
    设置日志记录器

    Args:
        name: 日志记录器名称

    Returns:
        配置好的Logger实例
    """
    logger = logging.getLogger(name)

    # 避免重复添加handler
    if logger.handlers:
        return logger

    logger.setLevel(getattr(logging, config.LOG_LEVEL.upper(), logging.INFO))

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(logging.Formatter(config.LOG_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
    logger.addHandler(console_handler)

    if config.LOG_FILE:
        file_handler = logging.FileHandler(Path(config.LOG_FILE), encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(config.LOG_FORMAT))
        logger.addHandler(file_handler)

    return logger


def get_logger(component: str) -> logging.Logger:
    """
    取得组件日志记录器（如 'gom'、'simulator'、'io'）

    Args:
        component: 组件名

    Returns:
        grid_broker.<component> 子记录器，继承根记录器的handler和级别
    """
    setup_logger()
    return logging.getLogger(f'{ROOT_LOGGER}.{component}')


@contextmanager
def quiet(level: int = logging.WARNING):
    """在with块内临时提高根记录器的级别，用于批量仿真"""
    root = setup_logger()
    previous = root.level
    root.setLevel(level)
    try:
        yield root
    finally:
        root.setLevel(previous)


# 命令行入口使用的根logger
logger = setup_logger()
