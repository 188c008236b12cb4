"""
Thread-pool execution of independent experiment jobs
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Generic, List, Tuple, TypeVar

from logs.logger import get_logger

logger = get_logger(__name__)

T = TypeVar('T')


@dataclass
class ExperimentJob(Generic[T]):
    """A named unit of work; the key orders results independently of completion order"""
    key: Tuple[int, ...]
    run: Callable[[], T]


def runJobs(jobs: List[ExperimentJob[T]], threads: int = 1) -> List[T]:
    """
    Run jobs on up to `threads` workers

    Jobs must not share mutable state. Exceptions propagate; callers that
    need isolation catch inside the job.

    Args:
        jobs: Jobs to execute
        threads: Worker count, 1 runs inline

    Returns:
        List[T]: Results sorted by job key
    """
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    ordered = sorted(jobs, key=lambda job: job.key)
    logger.info(f"Running {len(ordered)} jobs on {threads} thread(s)")

    if threads == 1:
        return [job.run() for job in ordered]

    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix='experiment') as executor:
        futures = [executor.submit(job.run) for job in ordered]
        return [future.result() for future in futures]
