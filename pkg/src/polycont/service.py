"""HTTP face of the solver: solve, tangent circles, health.

Endpoints (all JSON, schema "v1"):

    POST /api/solve       {"system": "...", "tasks"?, "precision"?, "seed"?}
    POST /api/apollonius  {"circles": [{"cx","cy","r"} x 3], "session"?}
    GET  /api/health

Malformed requests (bad JSON, missing/ill-typed fields, unparseable
systems, invalid circles) return 400; well-formed requests that violate
solver contracts (non-square systems, degenerate configurations) return
422 with a short error code; anything unexpected is a 500.  Solves run
on the threadpool so the event loop stays responsive, each request
builds its own solver options, and the session cache is the only shared
state (internally locked).  The worker-process budget comes from the
POLYCONT_WORKERS environment variable; requests asking for more tasks
are capped to it.

A built browser UI directory can optionally be mounted at / (the API
routes keep priority); see ``serve --ui`` on the command line.
"""

from __future__ import annotations

import os
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from .apollonius import (
    ApolloniusInput,
    Circle,
    IllPosedError,
    InvalidInputError,
    SessionCache,
    apollonius_solve,
)
from .homotopy import NotSquareError, ZeroDegreePolynomialError
from .jsonio import SCHEMA_VERSION, apollonius_to_dict, report_to_dict
from .poly import DimensionMismatchError, parse_system
from .solver import SolverOptions, solve_blackbox
from .xnum import DomainError, Precision

WORKER_BUDGET_ENV = "POLYCONT_WORKERS"
_PRECISIONS = {p.value: p for p in Precision}


class _BadRequest(ValueError):
    """Maps to HTTP 400."""


def worker_budget() -> int:
    """Upper bound on worker processes per request (0 = in-process)."""
    raw = os.environ.get(WORKER_BUDGET_ENV, "0")
    try:
        return max(0, int(raw))
    except ValueError:
        return 0


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={
            "version": SCHEMA_VERSION,
            "error": {"code": code, "message": message},
        },
    )


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception as exc:
        raise _BadRequest(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise _BadRequest("request body must be a JSON object")
    return body


def _int_field(body: dict, key: str, default: int) -> int:
    value = body.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise _BadRequest(f"{key!r} must be an integer")
    return value


def _solver_options(body: dict) -> SolverOptions:
    tasks = _int_field(body, "tasks", 0)
    if tasks < 0:
        raise _BadRequest("'tasks' must be >= 0")
    tasks = min(tasks, worker_budget())
    prec_name = body.get("precision", "d")
    if prec_name not in _PRECISIONS:
        raise _BadRequest(
            f"'precision' must be one of {sorted(_PRECISIONS)}, got {prec_name!r}"
        )
    defaults = SolverOptions()
    seed = _int_field(body, "seed", defaults.seed)
    return SolverOptions(tasks=tasks, precision=_PRECISIONS[prec_name], seed=seed)


def _parse_circles(body: dict) -> ApolloniusInput:
    circles = body.get("circles")
    if not isinstance(circles, list) or len(circles) != 3:
        raise InvalidInputError("'circles' must be a list of exactly 3 objects")
    parsed = []
    for k, item in enumerate(circles):
        if not isinstance(item, dict):
            raise InvalidInputError(f"circle {k + 1} must be an object")
        try:
            parsed.append(
                Circle(float(item["cx"]), float(item["cy"]), float(item["r"]))
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(
                f"circle {k + 1} needs numeric fields cx, cy, r"
            ) from exc
    return ApolloniusInput(tuple(parsed))


def create_app(
    cache: Optional[SessionCache] = None,
    static_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="polycont", docs_url=None, redoc_url=None)
    sessions = cache if cache is not None else SessionCache()

    @app.exception_handler(Exception)
    async def _internal(request: Request, exc: Exception):
        return _error(500, "Internal", f"{type(exc).__name__}: {exc}")

    @app.get("/api/health")
    async def health():
        return {"version": SCHEMA_VERSION, "status": "ok"}

    @app.post("/api/solve")
    async def solve(request: Request):
        try:
            body = await _json_body(request)
            text = body.get("system")
            if not isinstance(text, str) or not text.strip():
                raise _BadRequest("'system' must be a non-empty string")
            opts = _solver_options(body)
            try:
                system = parse_system(text)
            except ValueError as exc:
                raise _BadRequest(f"system text does not parse: {exc}") from exc
        except _BadRequest as exc:
            return _error(400, "BadRequest", str(exc))
        try:
            report = await run_in_threadpool(solve_blackbox, system, opts)
        except NotSquareError as exc:
            return _error(422, "NotSquare", str(exc))
        except ZeroDegreePolynomialError as exc:
            return _error(422, "ZeroDegree", str(exc))
        except (DomainError, DimensionMismatchError) as exc:
            return _error(422, "Domain", str(exc))
        return report_to_dict(report)

    @app.post("/api/apollonius")
    async def apollonius(request: Request):
        try:
            body = await _json_body(request)
            session = body.get("session")
            if session is not None and not isinstance(session, str):
                raise _BadRequest("'session' must be a string")
            opts = _solver_options(body)
            inp = _parse_circles(body)
        except InvalidInputError as exc:
            return _error(400, "InvalidInput", str(exc))
        except _BadRequest as exc:
            return _error(400, "BadRequest", str(exc))
        try:
            out = await run_in_threadpool(
                apollonius_solve, inp, session, sessions, opts
            )
        except IllPosedError as exc:
            return _error(422, "IllPosed", str(exc))
        return apollonius_to_dict(out)

    if static_dir is not None:
        # mounted last so /api/* routes always win
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def http_serve(
    port: int = 8032,
    host: str = "127.0.0.1",
    cache: Optional[SessionCache] = None,
    static_dir: Optional[str] = None,
) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(
        create_app(cache, static_dir=static_dir),
        host=host,
        port=port,
        log_level="warning",
    )
