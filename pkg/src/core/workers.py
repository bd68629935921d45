from PySide6.QtCore import QObject, QRunnable, Signal, Slot


class SweepWorkerSignals(QObject):
    """Signals for the sweep chunk worker"""

    finished = Signal(int, object)  # chunk id, list of records
    error = Signal(int, str)  # chunk id, error message


class SweepChunkWorker(QRunnable):
    """Evaluates one chunk of sweep points on a pool thread."""

    def __init__(self, chunk_id: int, task):
        super().__init__()
        self.chunk_id = chunk_id
        self.task = task
        self.signals = SweepWorkerSignals()
        # the pool must not delete the runnable while the sweep holds it
        self.setAutoDelete(False)

    @Slot()
    def run(self):
        try:
            records = self.task()
            self.signals.finished.emit(self.chunk_id, records)
        except Exception as e:
            self.signals.error.emit(
                self.chunk_id, f"{type(e).__name__}: {str(e)}"
            )
