"""FastAPI wrapper around the workflow layer.

Error mapping: malformed request bodies (including config validation)
come back as 422 with dotted key paths; domain errors raised while a
workflow runs (bad grids, uncovered sweep ranges, malformed trace files)
come back as 400 with the message.  Both are client errors; the CLI maps
them to its usage exit code.
"""

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..workflows import (run_match, run_optimize, run_readout,
                         run_spectrum_analyze, run_spectrum_synthesize,
                         run_stability)
from .schemas import (AnalyzeRequest, ConfigRequest, HealthResponse,
                      OptimizeRequest, ValidateRequest, ValidateResponse,
                      WorkflowResponse)


def _error_paths(exc: RequestValidationError):
    lines = []
    for item in exc.errors():
        loc = [str(p) for p in item["loc"] if p not in ("body",)]
        lines.append({"path": ".".join(loc) or "<root>", "message": item["msg"]})
    return lines


def create_app() -> FastAPI:
    app = FastAPI(title="rfchain", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request,
                                  exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"detail": _error_paths(exc)})

    @app.exception_handler(ValueError)
    async def _value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    async def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/validate", response_model=ValidateResponse)
    async def validate(req: ValidateRequest):
        n = len(req.protocol.passes) if req.protocol is not None else None
        return ValidateResponse(valid=True, n_protocol_passes=n)

    @app.post("/match", response_model=WorkflowResponse)
    async def match(req: ConfigRequest):
        result = run_match(req.config)
        return WorkflowResponse(files=result.files, summary=result.summary)

    @app.post("/spectrum/synthesize", response_model=WorkflowResponse)
    async def spectrum_synthesize(req: ConfigRequest):
        result = run_spectrum_synthesize(req.config)
        return WorkflowResponse(files=result.files, summary=result.summary)

    @app.post("/spectrum/analyze", response_model=WorkflowResponse)
    async def spectrum_analyze(req: AnalyzeRequest):
        result = run_spectrum_analyze(req.config, req.csv_text)
        return WorkflowResponse(files=result.files, summary=result.summary)

    @app.post("/readout", response_model=WorkflowResponse)
    async def readout(req: ConfigRequest):
        result = run_readout(req.config)
        return WorkflowResponse(files=result.files, summary=result.summary)

    @app.post("/stability", response_model=WorkflowResponse)
    async def stability(req: ConfigRequest):
        result = run_stability(req.config)
        return WorkflowResponse(files=result.files, summary=result.summary)

    @app.post("/optimize", response_model=WorkflowResponse)
    async def optimize(req: OptimizeRequest):
        result = run_optimize(req.config, req.protocol)
        return WorkflowResponse(files=result.files, summary=result.summary)

    return app
