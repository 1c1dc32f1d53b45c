"""Job manager for running experiments concurrently"""
import time
from concurrent.futures import ThreadPoolExecutor
from threading import Lock
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from brlab.logging_config import get_logger
from brlab.models.schemas import TaskStatus

logger = get_logger(__name__)

Job = Tuple[str, Callable[[], Any]]


class BackgroundTaskManager:
    """Track and execute experiment jobs on a thread pool"""

    def __init__(self):
        self.tasks: Dict[str, Dict[str, Any]] = {}
        self._lock = Lock()

    def create_task(self, task_id: str, task_name: str) -> Dict[str, Any]:
        """Register a job"""
        task = {
            "task_id": task_id,
            "task_name": task_name,
            "status": TaskStatus.PENDING,
            "started_at": None,
            "elapsed": None,
            "result": None,
            "error": None,
        }
        with self._lock:
            self.tasks[task_id] = task
        return task

    def update_status(self, task_id: str, status: TaskStatus,
                      result: Any = None, error: Optional[str] = None):
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                return
            task["status"] = status
            if status == TaskStatus.PROCESSING:
                task["started_at"] = time.monotonic()
            elif status in (TaskStatus.COMPLETED, TaskStatus.FAILED):
                if task["started_at"] is not None:
                    task["elapsed"] = time.monotonic() - task["started_at"]
                task["result"] = result
                task["error"] = error

    def get_task_status(self, task_id: str) -> Dict[str, Any]:
        return self.tasks.get(task_id, {})

    def _execute(self, task_id: str, fn: Callable[[], Any]) -> Any:
        self.update_status(task_id, TaskStatus.PROCESSING)
        try:
            result = fn()
        except Exception as e:
            logger.warning("job %s failed: %s", task_id, e)
            self.update_status(task_id, TaskStatus.FAILED, error=str(e))
            raise
        self.update_status(task_id, TaskStatus.COMPLETED, result=result)
        return result

    def run_all(self, jobs: Sequence[Job], max_workers: int = 1) -> List[Any]:
        """Run jobs concurrently; results come back in submission order.

        The first failing job's exception is re-raised after all jobs finish.
        """
        for task_id, _ in jobs:
            self.create_task(task_id, task_id)
        with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
            futures = [pool.submit(self._execute, task_id, fn) for task_id, fn in jobs]
        results = []
        for future in futures:
            results.append(future.result())
        return results

    def clear_finished(self):
        """Drop completed and failed jobs"""
        with self._lock:
            for task_id in [k for k, t in self.tasks.items()
                            if t["status"] in (TaskStatus.COMPLETED, TaskStatus.FAILED)]:
                del self.tasks[task_id]


# Global task manager instance
task_manager = BackgroundTaskManager()
