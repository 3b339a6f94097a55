import logging
from typing import Optional

LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"

# 第三方库日志过于冗长
_NOISY_LOGGERS = ("matplotlib", "urllib3", "PIL")


def setup_logging(level: Optional[str] = None) -> None:
    """
    配置根日志记录器

    Args:
        level: 日志级别名称，默认使用配置中的 LOG_LEVEL，DEBUG=true 时为 DEBUG
    """
    from smartchair.config import settings

    default = "DEBUG" if settings.DEBUG else settings.LOG_LEVEL
    level_name = (level or default).upper()
    logging.basicConfig(level=getattr(logging, level_name, logging.INFO), format=LOG_FORMAT, force=True)
    for name in _NOISY_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
