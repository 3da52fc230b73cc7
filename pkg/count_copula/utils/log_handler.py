import datetime
import logging
from pathlib import Path

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
LOG_DIR = "logs"


def get_formatter(is_worker):
    worker = "[Worker-%(process)d] - " if is_worker else ""
    return logging.Formatter(f"%(asctime)s - {worker}%(name)s:%(lineno)d - %(levelname)s - %(message)s")


def setup_logging(log_level, log_file=None, is_worker=False):
    """Send the root logger to the console and, when ``log_file`` is set, to that file as well."""
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
        handler.close()
    root_logger.setLevel(log_level)

    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    formatter = get_formatter(is_worker)
    for handler in handlers:
        handler.setFormatter(formatter)
        root_logger.addHandler(handler)


def generate_unique_log_path(log_dir=LOG_DIR) -> Path:
    timestamp = datetime.datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    return log_dir / f"count_copula_{timestamp}.log"
