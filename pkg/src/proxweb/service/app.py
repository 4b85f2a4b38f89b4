"""HTTP API over the platform: routes delegate 1:1 to the module ops.

Domain errors map to 4xx responses whose ``code`` field is the error's
stable wire code; anything unexpected becomes a 500 INTERNAL. Resolution
wires the presence log's live metrics into the rule engine, so statistics
predicates see the same data the analytics endpoints serve.
"""

import os
import socket
from contextlib import asynccontextmanager
from dataclasses import dataclass
from datetime import datetime

from fastapi import FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from ..errors import PortInUse, ProxwebError
from ..presence import (
    DEFAULT_BUCKET_S,
    DEFAULT_SESSION_GAP_S,
    StatMetric,
    heat_map_csv,
)
from ..registry import DEFAULT_INTERFERENCE_RADIUS_M, Mobility, RadioProtocol
from ..rule_dsl import format_rule, parse_rule
from ..timeutil import parse_timestamp, utc_now
from . import schemas
from .state import DEFAULT_SALT, PlatformState

SALT_ENV_VAR = "PROXWEB_SALT"

_STATUS_BY_ERROR = {
    "DUPLICATE_MAC": 409,
    "UNKNOWN_MAC": 404,
    "UNKNOWN_RULE": 404,
    "PORT_IN_USE": 409,
}


def _error_response(exc: ProxwebError, status: int | None = None) -> JSONResponse:
    body = schemas.ApiErrorBody(code=exc.code, message=str(exc), detail=exc.detail)
    return JSONResponse(
        status_code=status or _STATUS_BY_ERROR.get(exc.code, 400),
        content=body.model_dump(),
    )


def _parse_time_param(value: str, name: str) -> datetime:
    try:
        return parse_timestamp(value)
    except ValueError:
        raise RequestValidationError(
            [{"loc": ("query", name), "msg": f"not a timestamp: {value!r}"}]
        ) from None


def create_app(state: PlatformState) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        state.close()

    app = FastAPI(title="proxweb", version="0.1.0", lifespan=lifespan)
    app.state.platform = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ProxwebError)
    async def handle_domain_error(request: Request, exc: ProxwebError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = ".".join(str(p) for p in first.get("loc", ()))
        body = schemas.ApiErrorBody(
            code="INVALID_REQUEST",
            message=first.get("msg", "invalid request"),
            detail=loc or None,
        )
        return JSONResponse(status_code=400, content=body.model_dump())

    @app.exception_handler(Exception)
    async def handle_unexpected(request: Request, exc: Exception):
        body = schemas.ApiErrorBody(code="INTERNAL", message=str(exc))
        return JSONResponse(status_code=500, content=body.model_dump())

    # -- config -----------------------------------------------------------

    @app.get("/config", response_model=schemas.ConfigView)
    def get_config():
        p = state.propagation
        return schemas.ConfigView(
            propagation=schemas.PropagationView(
                p0_dbm=p.p0_dbm,
                n=p.n,
                sigma_db=p.sigma_db,
                sensitivity_dbm=p.sensitivity_dbm,
            ),
            heat_map_bucket_s=DEFAULT_BUCKET_S,
            session_gap_s=DEFAULT_SESSION_GAP_S,
            interference_radius_m=DEFAULT_INTERFERENCE_RADIUS_M,
        )

    # -- registry ----------------------------------------------------------

    @app.post("/nodes", response_model=schemas.NodeView, status_code=201)
    def register_node(body: schemas.NodeCreate):
        return schemas.NodeView.from_node(state.register_node(body.to_node()))

    @app.get("/nodes", response_model=list[schemas.NodeView])
    def list_nodes(
        owner: str | None = None,
        venue: str | None = None,
        protocol: str | None = None,
        mobility: str | None = None,
    ):
        try:
            protocol_filter = RadioProtocol(protocol) if protocol else None
            mobility_filter = Mobility(mobility) if mobility else None
        except ValueError as exc:
            raise RequestValidationError(
                [{"loc": ("query",), "msg": str(exc)}]
            ) from None
        nodes = state.registry.list_nodes(
            owner=owner,
            venue_id=venue,
            protocol=protocol_filter,
            mobility=mobility_filter,
        )
        return [schemas.NodeView.from_node(n) for n in nodes]

    @app.patch("/nodes/{mac}/metadata", response_model=schemas.NodeView)
    def update_metadata(mac: str, body: schemas.MetadataPatch):
        return schemas.NodeView.from_node(state.update_metadata(mac, body.root))

    @app.get(
        "/venues/{venue_id}/interference",
        response_model=list[schemas.InterferencePairView],
    )
    def interference(venue_id: str, radius: float = Query(DEFAULT_INTERFERENCE_RADIUS_M, gt=0)):
        pairs = state.registry.interference_report(venue_id, radius_m=radius)
        return [schemas.InterferencePairView.from_pair(p) for p in pairs]

    # -- rules ---------------------------------------------------------------

    @app.put("/contents", response_model=schemas.StoredContent)
    def put_content(body: schemas.ContentModel):
        return schemas.StoredContent(content_id=state.put_content(body.to_chunk()))

    @app.get("/contents", response_model=list[schemas.ContentModel])
    def list_contents():
        return [schemas.ContentModel.from_chunk(c) for c in state.rules.list_contents()]

    @app.put("/rules", response_model=schemas.StoredRule)
    def put_rule(body: schemas.RuleModel):
        rule = body.to_rule()
        if not rule.rule_id:
            # no id supplied: derive the deterministic id of the rule's
            # canonical DSL text, matching what the parser would assign
            rule = parse_rule(format_rule(rule))
        return schemas.StoredRule(rule_id=state.put_rule(rule))

    @app.get("/rules", response_model=list[schemas.RuleModel])
    def list_rules(mac: str | None = None):
        rules = state.rules.rules_for_mac(mac) if mac else state.rules.list_rules()
        return [schemas.RuleModel.from_rule(r) for r in rules]

    @app.delete("/rules/{rule_id}", status_code=204)
    def delete_rule(rule_id: str):
        state.delete_rule(rule_id)
        return Response(status_code=204)

    @app.post("/rules:parse", response_model=schemas.RuleModel)
    async def parse_rule_text(request: Request):
        text = (await request.body()).decode("utf-8")
        return schemas.RuleModel.from_rule(parse_rule(text))

    # -- presence ---------------------------------------------------------------

    @app.post("/scans", response_model=schemas.IngestResult)
    def ingest_scan(body: schemas.ScanReportModel):
        return schemas.IngestResult(appended=state.ingest_scan(body.to_report()))

    @app.post("/resolve", response_model=list[schemas.ActivationView])
    def resolve(body: schemas.ScanReportModel):
        activations = state.resolve(body.to_report())
        return [schemas.ActivationView.from_activation(a) for a in activations]

    @app.get("/stats/heatmap")
    def heatmap(
        request: Request,
        from_: str = Query(alias="from"),
        to: str = Query(),
        bucket: float = Query(DEFAULT_BUCKET_S, gt=0),
        mac: str | None = None,
    ):
        cells = state.presence.heat_map(
            from_ts=_parse_time_param(from_, "from"),
            to_ts=_parse_time_param(to, "to"),
            bucket_s=bucket,
            mac=mac,
        )
        if "text/csv" in request.headers.get("accept", ""):
            return PlainTextResponse(heat_map_csv(cells), media_type="text/csv")
        return [
            schemas.HeatMapCellView.from_cell(c).model_dump(mode="json") for c in cells
        ]

    @app.get("/stats/dwell", response_model=list[schemas.DwellSessionView])
    def dwell(mac: str, gap: float = Query(DEFAULT_SESSION_GAP_S, gt=0)):
        sessions = state.presence.dwell_sessions(mac, gap_s=gap)
        return [schemas.DwellSessionView.from_session(s) for s in sessions]

    @app.get("/stats/live", response_model=schemas.LiveMetricResult)
    def live(
        metric: str,
        mac: str,
        window: float = Query(gt=0),
        at: str | None = None,
    ):
        try:
            parsed_metric = StatMetric(metric)
        except ValueError:
            raise RequestValidationError(
                [{"loc": ("query", "metric"), "msg": f"unknown metric {metric!r}"}]
            ) from None
        when = _parse_time_param(at, "at") if at else utc_now()
        value = state.presence.live_metric(parsed_metric, mac, window, when)
        return schemas.LiveMetricResult(value=value)

    return app


@dataclass
class ServeConfig:
    port: int = 8000
    host: str = "127.0.0.1"
    salt: str = DEFAULT_SALT
    data_dir: str = "./proxweb-data"


def serve(config: ServeConfig) -> None:
    """Run the service; blocks until shutdown, then flushes all state.

    The PROXWEB_SALT environment variable overrides the configured salt.
    """
    _check_port_free(config.host, config.port)
    salt = os.environ.get(SALT_ENV_VAR) or config.salt
    state = PlatformState(config.data_dir, salt=salt)
    app = create_app(state)

    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


def _check_port_free(host: str, port: int) -> None:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        raise PortInUse(f"port {port} on {host} is already in use") from exc
    finally:
        probe.close()
