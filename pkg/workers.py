"""
Environment configuration and the shared worker pool.

Settings are read from the process environment (and a local ``.env`` file, if
present) once at import time.
"""
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from dotenv import load_dotenv

from errors import DomainError

load_dotenv()

ORTHOPERSIST_THREADS = os.getenv("ORTHOPERSIST_THREADS")
ORTHOPERSIST_LOG_LEVEL = os.getenv("ORTHOPERSIST_LOG_LEVEL", "INFO")

logger = logging.getLogger("orthopersist.workers")

T = TypeVar("T")
R = TypeVar("R")


def worker_cap(override: Optional[int] = None) -> int:
    """Number of worker processes allowed for a parallel map."""
    if override is not None:
        if override < 1:
            raise DomainError(f"worker count must be >= 1, got {override}")
        return override
    if ORTHOPERSIST_THREADS is None or ORTHOPERSIST_THREADS.strip() == "":
        return os.cpu_count() or 1
    try:
        cap = int(ORTHOPERSIST_THREADS)
    except ValueError as e:
        raise DomainError(f"ORTHOPERSIST_THREADS must be an integer, got {ORTHOPERSIST_THREADS!r}") from e
    if cap < 1:
        raise DomainError(f"ORTHOPERSIST_THREADS must be >= 1, got {cap}")
    return cap


def log_level() -> int:
    level = logging.getLevelName(ORTHOPERSIST_LOG_LEVEL.upper())
    return level if isinstance(level, int) else logging.INFO


def map_streams(fn: Callable[[T], R], tasks: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """
    Apply ``fn`` to every task and return the results in task order.

    ``fn`` must be a picklable top-level function. With a cap of one worker, or
    a single task, everything runs in-process.
    """
    cap = min(worker_cap(workers), max(len(tasks), 1))
    if cap == 1:
        return [fn(task) for task in tasks]
    logger.info(f"Dispatching {len(tasks)} tasks over {cap} worker processes")
    with ProcessPoolExecutor(max_workers=cap) as ex:
        return list(ex.map(fn, tasks))
