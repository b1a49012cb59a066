"""
InImNet 的統一 logging：單一具名 logger，等級前綴帶顏色
"""
import logging
import sys
from typing import Optional

from colorama import Fore, Style

LOGGER_NAME = "InImNet"


class ColoredFormatter(logging.Formatter):
    """[LEVEL] message，等級依嚴重程度上色"""

    LEVEL_COLORS = {
        logging.DEBUG: Fore.CYAN,
        logging.INFO: Fore.GREEN,
        logging.WARNING: Fore.YELLOW,
        logging.ERROR: Fore.RED,
        logging.CRITICAL: Style.BRIGHT + Fore.LIGHTRED_EX,
    }

    def format(self, record):
        color = self.LEVEL_COLORS.get(record.levelno, Style.RESET_ALL)
        return f"{color}[{record.levelname}]{Style.RESET_ALL} {record.getMessage()}"


_logger: Optional[logging.Logger] = None


def setup_logger(name: str = LOGGER_NAME, level: int = logging.INFO) -> logging.Logger:
    """
    設置全局 logger (重複呼叫只回傳同一個實例)

    handler 寫到 stdout，propagate 關閉以免 root logger 重複輸出。
    """
    global _logger
    if _logger is not None:
        return _logger

    _logger = logging.getLogger(name)
    _logger.setLevel(level)
    _logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(level)
    console_handler.setFormatter(ColoredFormatter())
    _logger.addHandler(console_handler)
    _logger.propagate = False
    return _logger


def get_logger() -> logging.Logger:
    global _logger
    if _logger is None:
        _logger = setup_logger()
    return _logger


def set_log_level(level: int):
    logger = get_logger()
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.setLevel(level)


def set_log_level_by_name(level_name: str):
    """
    通過名稱設置日誌等級

    Args:
        level_name: 'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'；未知名稱視為 INFO
    """
    level_map = {
        'DEBUG': logging.DEBUG,
        'INFO': logging.INFO,
        'WARNING': logging.WARNING,
        'ERROR': logging.ERROR,
        'CRITICAL': logging.CRITICAL,
    }
    set_log_level(level_map.get(level_name.upper(), logging.INFO))
