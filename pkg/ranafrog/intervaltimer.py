# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import time
from threading import Event, Lock, Thread

class IntervalTimer:
    'Call a function every interval seconds on a background thread until stopped'

    def __init__(self, interval, function, *args, **kwargs):
        self._interval = interval
        self._function = function
        self._args = args
        self._kwargs = kwargs
        self._count = 0
        self._event = Event()
        self._thread = Thread(target=self.target, daemon=True)

    def start(self):
        'Starts the timer thread'
        self._thread.start()
        return self

    def target(self):
        'Waits one interval, then calls the function, until stopped'
        while not self._event.wait(self._interval):
            self._function(*self._args, **self._kwargs)
            self._count += 1

    def get_count(self):
        'Returns number of calls so far'
        return self._count

    def stop(self):
        'Stops the timer thread'
        self._event.set()
        if self._thread.is_alive():
            self._thread.join()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()
        return False


class ProgressCounter:
    'Thread-safe count of finished work items with a rate since creation'

    def __init__(self, total):
        self.total = total
        self._done = 0
        self._lock = Lock()
        self._start = time.perf_counter()

    def increment(self):
        with self._lock:
            self._done += 1

    def get_done(self):
        return self._done

    def get_rate(self):
        'Returns items per second since creation'
        elapsed = time.perf_counter() - self._start
        return self._done / elapsed if elapsed > 0 else 0.0
