import os
import sys
from pathlib import Path

from loguru import logger

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | <level>{level: <10}</level> | <level>{message}</level>"
)

# Stage levels, all at INFO+5 so LOG_LEVEL=INFO shows them
STAGES = {
    "EXPERIMENT": "<blue><bold>",
    "MITIGATION": "<yellow><bold>",
    "CAPACITY": "<magenta><bold>",
    "REPORT": "<cyan><bold>",
}
for _name, _color in STAGES.items():
    logger.level(_name, no=25, color=_color)


def configure_logging(level: str | None = None, log_file: str | Path | None = None) -> None:
    """Console sink on stderr, plus a JSON-lines file sink when `log_file` is given.

    Defaults come from LEAKBENCH_LOG_LEVEL (or LOG_LEVEL) and LEAKBENCH_LOG_FILE.
    """
    level = (level or os.getenv("LEAKBENCH_LOG_LEVEL") or os.getenv("LOG_LEVEL") or "INFO").upper()
    log_file = log_file or os.getenv("LEAKBENCH_LOG_FILE")

    logger.remove()
    logger.add(sys.stderr, level=level, format=CONSOLE_FORMAT, colorize=True)
    if log_file:
        logger.add(str(log_file), level=level, serialize=True)


configure_logging()

log = logger
