import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, TypeVar

from tqdm import tqdm

from ..exceptions import InvalidInputError

logger = logging.getLogger("seqpt")

T = TypeVar("T")


class ShotBatchProcessor:
    """Runs indexed shots in batches, optionally on a thread pool.

    Each shot is a pure function of its index, so results are returned in
    index order and do not depend on the worker count.
    """

    def __init__(
        self,
        max_workers: int = 1,
        max_batch_size: int = 2000,
        progress: bool = False,
    ):
        if max_workers < 1:
            raise InvalidInputError(f"max_workers must be >= 1, got {max_workers}")
        if max_batch_size < 1:
            raise InvalidInputError(f"max_batch_size must be >= 1, got {max_batch_size}")
        self.max_workers = max_workers
        self.max_batch_size = max_batch_size
        self.progress = progress
        self.processing_metrics: Dict[str, Any] = {}
        self.reset_metrics()

    def run(
        self,
        shot: Callable[[int], T],
        count: int,
        description: str = "shots",
        start: int = 0,
    ) -> List[T]:
        """Evaluate ``shot(i)`` for i in [start, start + count)."""
        if count < 0:
            raise InvalidInputError(f"shot count must be >= 0, got {count}")
        start_time = time.time()
        batches = [
            range(lo, min(lo + self.max_batch_size, start + count))
            for lo in range(start, start + count, self.max_batch_size)
        ]

        def run_batch(indices: range) -> List[T]:
            return [shot(i) for i in indices]

        results: List[T] = []
        with tqdm(total=count, desc=description, disable=not self.progress, leave=False) as bar:
            if self.max_workers == 1 or len(batches) <= 1:
                for indices in batches:
                    results.extend(run_batch(indices))
                    bar.update(len(indices))
            else:
                with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                    # map() yields in submission order, which is index order
                    for indices, batch in zip(batches, executor.map(run_batch, batches)):
                        results.extend(batch)
                        bar.update(len(indices))

        self._update_metrics(count, len(batches), start_time)
        return results

    def _update_metrics(self, count: int, batch_count: int, start_time: float) -> None:
        elapsed = time.time() - start_time
        metrics = self.processing_metrics
        metrics["total_processed"] += count
        metrics["batches"] += batch_count
        metrics["total_time"] += elapsed
        metrics["last_batch_size"] = count
        metrics["last_run_time"] = elapsed
        if metrics["total_processed"]:
            metrics["avg_shot_time"] = metrics["total_time"] / metrics["total_processed"]
        logger.debug(f"Processed {count} {'shot' if count == 1 else 'shots'} in {elapsed:.2f}s ({batch_count} batches)")

    def get_metrics(self) -> Dict[str, Any]:
        """Get current processing metrics."""
        return dict(self.processing_metrics)

    def reset_metrics(self) -> None:
        """Reset processing metrics."""
        self.processing_metrics = {
            "total_processed": 0,
            "batches": 0,
            "total_time": 0.0,
            "avg_shot_time": 0.0,
            "last_batch_size": 0,
            "last_run_time": None,
        }


def run_shots(
    shot: Callable[[int], T],
    count: int,
    jobs: int = 1,
    progress: bool = False,
    description: str = "shots",
    processor: Optional[ShotBatchProcessor] = None,
) -> List[T]:
    """Convenience wrapper building a processor for a single run."""
    processor = processor or ShotBatchProcessor(max_workers=jobs, progress=progress)
    return processor.run(shot, count, description)
