import asyncio
import contextlib
import logging
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, TypeVar

_logger = logging.getLogger(__name__)

Job = TypeVar("Job")
Result = TypeVar("Result")

_average_duration_seconds: Optional[float] = None

def get_job_average_duration_seconds() -> Optional[float]:
    return _average_duration_seconds

def _record_duration(duration: float) -> None:
    global _average_duration_seconds

    if _average_duration_seconds is None:
        _average_duration_seconds = duration
    else:
        # Update the moving average (simple exponential moving average with alpha=0.1)
        _average_duration_seconds = (_average_duration_seconds * 9 + duration) / 10

async def _worker_processor(
        name: str,
        job_queue: asyncio.Queue,
        executor: Executor,
        handler: Callable[[Job], Result],
        results: List[Any]
) -> None:
    """
    Takes jobs from the queue until cancelled and runs each one on the executor.
    A failed job stores its exception in `results`.
    """
    loop = asyncio.get_running_loop()
    _logger.info(f"{name} started.")

    while True:
        index, job = await job_queue.get()

        try:
            _logger.info(f"{name} starting job {index + 1}")
            start_time = time.time()

            results[index] = await loop.run_in_executor(executor, handler, job)

            duration = time.time() - start_time
            _record_duration(duration)
            _logger.info(
                f"{name} completed job {index + 1} in {duration:.2f} seconds "
                f"(average {_average_duration_seconds:.2f} s, {job_queue.qsize()} queued)."
            )
        except Exception as e:
            _logger.error(f"{name} failed on job {index + 1}: {e}")
            results[index] = e
        finally:
            job_queue.task_done()

async def process_jobs(jobs: Sequence[Job], handler: Callable[[Job], Result], workers: int = 1) -> List[Result]:
    """
    Runs `handler` over `jobs` with up to `workers` jobs in flight and returns
    the results in job order. One worker runs jobs on a thread of this process
    (sharing its dataset cache); more workers use a process pool.
    """
    job_queue: asyncio.Queue = asyncio.Queue()
    for item in enumerate(jobs):
        job_queue.put_nowait(item)

    results: List[Any] = [None] * len(jobs)
    worker_count = max(1, min(workers, len(jobs)))
    executor = ThreadPoolExecutor(max_workers=1) if worker_count == 1 else ProcessPoolExecutor(max_workers=worker_count)

    with executor:
        tasks = [
            asyncio.create_task(
                _worker_processor(f"Sweep worker {i + 1}", job_queue, executor, handler, results),
                name=f"Sweep worker {i + 1}"
            )
            for i in range(worker_count)
        ]
        await job_queue.join()
        for task in tasks:
            task.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await asyncio.gather(*tasks, return_exceptions=True)

    failures = [result for result in results if isinstance(result, Exception)]
    if failures:
        raise failures[0]
    return results

def run_jobs(jobs: Sequence[Job], handler: Callable[[Job], Result], workers: int = 1) -> List[Result]:
    return asyncio.run(process_jobs(jobs, handler, workers))
