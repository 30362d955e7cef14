"""Session persistence and cached fitting for the HTTP service.

Each session lives in ``<workdir>/sessions/<id>/`` as the same documents the
CLI reads and writes (trajectory.csv, fits.json) plus a small meta.json with
the lifecycle status.  Fitting runs once per session on a worker thread;
signal extraction and quantification are computed on demand from the cached
fits, so repeated identical requests return identical payloads.
"""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from ..errors import NNSError
from ..io_formats import (
    parse_fits,
    parse_trajectory_text,
    write_fits,
)
from ..pipeline import fit_session
from ..shape_model import ShapeModel, load_shape_model


class UnknownSessionError(NNSError):
    pass


class SessionNotReadyError(NNSError):
    """Session exists but has no fits yet (still uploading/fitting, or failed)."""

    def __init__(self, meta: dict):
        self.meta = meta
        super().__init__(f"session is not fitted (status: {meta.get('status')})")


class SessionStore:
    def __init__(self, workdir: str | Path, models: dict[str, ShapeModel],
                 max_workers: int = 2):
        self.workdir = Path(workdir)
        self.sessions_dir = self.workdir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.models = models
        self._executor = ThreadPoolExecutor(max_workers=max_workers)
        self._lock = threading.Lock()
        self._fits_cache: dict[str, tuple] = {}

    @classmethod
    def from_paths(cls, workdir: str | Path, model_paths: dict[str, str | Path],
                   **kwargs) -> "SessionStore":
        models = {name: load_shape_model(path) for name, path in model_paths.items()}
        return cls(workdir, models, **kwargs)

    # -- lifecycle ---------------------------------------------------------

    def create(self, trajectory_csv: str, model_name: str,
               source_id: str | None = None) -> dict:
        if model_name not in self.models:
            raise KeyError(model_name)
        session = parse_trajectory_text(trajectory_csv,
                                        source_id=source_id or "upload")
        session_id = uuid.uuid4().hex
        sdir = self.sessions_dir / session_id
        sdir.mkdir(parents=True)
        (sdir / "trajectory.csv").write_text(trajectory_csv, encoding="utf-8")
        meta = {
            "session_id": session_id,
            "status": "uploaded",
            "model": model_name,
            "source_id": session.source_id,
            "frame_count": len(session),
            "fitted_frames": None,
            "error": None,
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        self._write_meta(session_id, meta)
        self._executor.submit(self._fit_job, session_id, model_name)
        return meta

    def _fit_job(self, session_id: str, model_name: str) -> None:
        self._update_meta(session_id, status="fitting")
        sdir = self.sessions_dir / session_id
        try:
            text = (sdir / "trajectory.csv").read_text(encoding="utf-8")
            session = parse_trajectory_text(text)
            fits = fit_session(self.models[model_name], session)
            timestamps = session.timestamps()
            write_fits(fits, timestamps, sdir / "fits.json")
            with self._lock:
                self._fits_cache[session_id] = (fits, timestamps)
            self._update_meta(session_id, status="fitted",
                              fitted_frames=sum(f is not None for f in fits))
        except Exception as exc:  # noqa: BLE001 - status carries the message
            self._update_meta(session_id, status="error", error=str(exc))

    # -- metadata ----------------------------------------------------------

    def _meta_path(self, session_id: str) -> Path:
        return self.sessions_dir / session_id / "meta.json"

    def _write_meta(self, session_id: str, meta: dict) -> None:
        path = self._meta_path(session_id)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")
        tmp.replace(path)

    def _update_meta(self, session_id: str, **changes) -> None:
        with self._lock:
            meta = self.get_meta(session_id)
            meta.update(changes)
            self._write_meta(session_id, meta)

    def get_meta(self, session_id: str) -> dict:
        path = self._meta_path(session_id)
        if not path.exists():
            raise UnknownSessionError(f"unknown session {session_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    # -- analysis ----------------------------------------------------------

    def get_fits(self, session_id: str) -> tuple:
        """Cached (fits, timestamps) for a fitted session."""
        with self._lock:
            cached = self._fits_cache.get(session_id)
        if cached is not None:
            return cached
        meta = self.get_meta(session_id)
        if meta["status"] != "fitted":
            raise SessionNotReadyError(meta)
        fits, timestamps = parse_fits(self.sessions_dir / session_id / "fits.json")
        with self._lock:
            self._fits_cache[session_id] = (fits, timestamps)
        return fits, timestamps

    def wait_until_settled(self, session_id: str, timeout_s: float = 30.0) -> dict:
        """Poll until the fit job finishes (used by tests)."""
        import time

        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            meta = self.get_meta(session_id)
            if meta["status"] in ("fitted", "error"):
                return meta
            time.sleep(0.05)
        return self.get_meta(session_id)
