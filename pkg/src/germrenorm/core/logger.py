import logging
from typing import List

from rich.logging import RichHandler

from germrenorm.config import Config

_DEFAULT_FORMAT = "%(asctime)s |%(levelname)s| %(name)s:%(lineno)d | %(message)s"


def setup_logger(config: Config) -> None:
    formatter = config.logger.format or _DEFAULT_FORMAT
    level = config.logger.level.upper()
    if level not in logging._nameToLevel:
        level = "INFO"
    log_level: int = logging._nameToLevel[level]

    handlers: List[logging.Handler] = []
    if config.logger.console:
        if config.logger.rich:
            handlers.append(RichHandler(rich_tracebacks=True, show_path=False))
        else:
            handlers.append(logging.StreamHandler())
    if config.logger.file:
        handlers.append(logging.FileHandler(config.logger.file, encoding="utf-8"))
    if not handlers:
        handlers.append(logging.NullHandler())

    logging.basicConfig(
        level=log_level,
        format=formatter,
        handlers=handlers,
        force=True,
    )
    logging.getLogger(__name__).debug("log_level: %s, formatter: %s", log_level, formatter)
