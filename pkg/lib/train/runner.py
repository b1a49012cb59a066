"""
以執行緒分派每筆資料的工作，結果依輸入順序排列
"""

import logging
import threading
from typing import Callable, List, Optional, Sequence, TypeVar

logger = logging.getLogger("InImNet")

T = TypeVar("T")
R = TypeVar("R")


class BatchRunner:
    def __init__(self, workers: int = 1, stop_flag: Optional[threading.Event] = None):
        self.workers = max(1, int(workers))
        self.stop_flag = stop_flag or threading.Event()
        self.lock = threading.Lock()

    def map(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """
        對每個 item 呼叫 fn，回傳與 items 同順序的結果

        任何 worker 丟出的第一個例外會在所有執行緒結束後重新丟出。
        """
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [fn(item) for item in items]

        results: List[Optional[R]] = [None] * len(items)
        errors: List[BaseException] = []
        cursor = [0]

        def worker():
            while not self.stop_flag.is_set():
                with self.lock:
                    if errors or cursor[0] >= len(items):
                        return
                    idx = cursor[0]
                    cursor[0] += 1
                try:
                    results[idx] = fn(items[idx])
                except BaseException as e:
                    with self.lock:
                        errors.append(e)
                    return

        threads = [threading.Thread(target=worker, daemon=True) for _ in range(min(self.workers, len(items)))]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if errors:
            raise errors[0]
        return results
