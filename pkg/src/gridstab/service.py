"""Local HTTP JSON service.

Thin wrapper around ops.execute with the same canonical serialization as
the command line tool, so responses are byte identical to CLI output for
the same request. Heatmaps can run in the background ({"background": true})
and are then polled via /jobs/{id}; finished jobs live in a small LRU store.
"""

from __future__ import annotations

import threading
import uuid
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from . import ops
from .errors import GridStabError, SchemaError

JOB_STORE_CAP = 100


class JobStore:
    """Tiny thread safe LRU of background job records."""

    def __init__(self, cap=JOB_STORE_CAP):
        self.cap = cap
        self._jobs = OrderedDict()
        self._lock = threading.Lock()

    def create(self):
        job_id = uuid.uuid4().hex
        with self._lock:
            self._jobs[job_id] = {"job_id": job_id, "status": "queued", "result": None, "error": None}
            while len(self._jobs) > self.cap:
                self._jobs.popitem(last=False)
        return job_id

    def update(self, job_id, **fields):
        with self._lock:
            job = self._jobs.get(job_id)
            if job is not None:
                job.update(fields)

    def get(self, job_id):
        with self._lock:
            job = self._jobs.get(job_id)
            if job is not None:
                self._jobs.move_to_end(job_id)
                return dict(job)
        return None


def _json_response(doc, status=200):
    return Response(content=ops.dumps(doc), status_code=status, media_type="application/json")


def _error_response(exc):
    status = 400 if isinstance(exc, SchemaError) else 422
    return _json_response({"error": exc.code, "detail": str(exc)}, status=status)


def create_app(feeder_spec=None):
    """Build the application; feeder_spec is the default feeder for requests
    that do not carry one (a path, builtin name, or feeder dict)."""
    app = FastAPI(title="gridstab", docs_url=None, redoc_url=None)
    # the companion browser UI is served as static files from a different
    # origin; the service binds loopback, so open CORS is fine here
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    default_feeder = ops.resolve_feeder(feeder_spec) if feeder_spec is not None else None
    jobs = JobStore()
    pool = ThreadPoolExecutor(max_workers=2)

    async def _body(request):
        try:
            body = await request.json()
        except Exception:
            raise SchemaError("request body is not valid JSON")
        if not isinstance(body, dict):
            raise SchemaError("request body must be a JSON object")
        return body

    def _run_sync(op, body):
        return _json_response(ops.execute(op, body, default_feeder=default_feeder))

    @app.get("/feeder")
    def get_feeder():
        try:
            return _run_sync("feeder_info", {})
        except GridStabError as exc:
            return _error_response(exc)

    def _post(op):
        async def handler(request: Request):
            try:
                body = await _body(request)
                if op == "heatmap" and body.get("background"):
                    ops.validate_params(op, body)
                    job_id = jobs.create()

                    def work():
                        jobs.update(job_id, status="running")
                        try:
                            doc = ops.execute(op, body, default_feeder=default_feeder)
                            jobs.update(job_id, status="done", result=doc)
                        except GridStabError as exc:
                            jobs.update(
                                job_id,
                                status="error",
                                error={"error": exc.code, "detail": str(exc)},
                            )
                        except Exception as exc:
                            jobs.update(
                                job_id,
                                status="error",
                                error={"error": "internal", "detail": str(exc)},
                            )

                    pool.submit(work)
                    return _json_response({"job_id": job_id, "status": "queued"}, status=202)
                return _run_sync(op, body)
            except GridStabError as exc:
                return _error_response(exc)

        return handler

    for op in ("heatmap", "sweep", "simulate", "acrit", "metrics", "experiment"):
        app.post("/" + op)(_post(op))

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return _json_response({"error": "not_found", "detail": "unknown job"}, status=404)
        return _json_response(job)

    return app
