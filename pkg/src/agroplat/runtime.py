"""Platform assembly: storage, services, model lifecycle, background workers."""
from __future__ import annotations

import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor

from .analytics import compute_usage_stats, download_series
from .chat import ChatService
from .config import Config
from .diagnosis import DiagnosisService
from .errors import PipelineError, StateConflict
from .events import EventBus
from .marketplace import MarketService
from .neuralnet import build_network, disease_classifier_spec, load_model, save_model
from .registry import Registry
from .store import BlobStore, DocumentStore

log = logging.getLogger("agroplat")


class Platform:
    """One fully wired platform instance.

    Owns the document/blob stores, the event bus, all domain services, the
    current classifier, the diagnosis worker pool, and the auction sweeper.
    The gateway sits on top of this object; tests can drive it directly.
    """

    def __init__(self, config: Config = None, clock=time.time):
        self.config = config or Config()
        self.clock = clock
        os.makedirs(self.config.data_dir, exist_ok=True)
        self.store = DocumentStore(os.path.join(self.config.data_dir, "docs"),
                                   fsync=self.config.fsync)
        self.blobs = BlobStore(os.path.join(self.config.data_dir, "blobs"))
        self.bus = EventBus()
        self.registry = Registry(self.store, clock=clock,
                                 scrypt_log_n=self.config.scrypt_log_n)
        self.chat = ChatService(self.store, self.registry, self.bus, clock=clock)
        self.market = MarketService(self.store, self.registry, self.bus, clock=clock)
        self._model_lock = threading.Lock()
        self._model = None  # built or loaded lazily on first use
        self.diagnosis = DiagnosisService(
            self.store, self.blobs, self.registry, self.bus,
            model_provider=self.get_model, clock=clock,
            on_submitted=self.enqueue_processing)
        self._pool = ThreadPoolExecutor(max_workers=2,
                                        thread_name_prefix="diagnosis")
        self._in_flight = set()
        self._in_flight_lock = threading.Lock()
        self._sweep_stop = threading.Event()
        self._sweeper = None

    def _initial_model(self):
        path = self.config.model_path
        if path and os.path.exists(path):
            with open(path, "rb") as fh:
                return load_model(fh.read())
        return build_network(disease_classifier_spec(self.config.model_input_size),
                             seed=0)

    # -- model lifecycle ---------------------------------------------------

    def get_model(self):
        with self._model_lock:
            if self._model is None:
                self._model = self._initial_model()
            return self._model

    def set_model(self, model):
        with self._model_lock:
            self._model = model
        if self.config.model_path:
            data = save_model(model)
            tmp = self.config.model_path + ".tmp"
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, self.config.model_path)

    # -- diagnosis worker pool ----------------------------------------------

    def enqueue_processing(self, request_id: str):
        """Hand a submitted request to the worker pool, once per request."""
        with self._in_flight_lock:
            if request_id in self._in_flight:
                return
            self._in_flight.add(request_id)
        self._pool.submit(self._process_job, request_id)

    def _process_job(self, request_id: str):
        try:
            self.diagnosis.process_request(request_id)
        except StateConflict:
            pass  # already handled elsewhere
        except PipelineError as exc:
            log.warning("processing failed, request stays retryable: %s", exc)
        except Exception:
            log.exception("unexpected processing failure for %s", request_id)
        finally:
            with self._in_flight_lock:
                self._in_flight.discard(request_id)

    def drain_processing(self, timeout: float = 30.0):
        """Block until no diagnosis job is queued or running (test helper)."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self._in_flight_lock:
                if not self._in_flight:
                    return True
            time.sleep(0.01)
        return False

    # -- background sweeper --------------------------------------------------

    def start(self):
        if self._sweeper is None:
            self._sweep_stop.clear()
            self._sweeper = threading.Thread(target=self._sweep_loop,
                                             name="auction-sweeper", daemon=True)
            self._sweeper.start()

    def _sweep_loop(self):
        while not self._sweep_stop.wait(self.config.sweep_interval):
            try:
                self.market.close_due()
            except Exception:
                log.exception("auction sweep failed")

    def stop(self):
        self._sweep_stop.set()
        if self._sweeper is not None:
            self._sweeper.join(timeout=5)
            self._sweeper = None
        self._pool.shutdown(wait=True)
        self.store.close()

    # -- convenience reads ----------------------------------------------------

    def usage_stats(self):
        return compute_usage_stats(self.store)

    def downloads(self):
        return download_series(self.store)
