"""
采集网关 - 接收座椅传感单元每秒上传的 JSON 批次
"""

import logging
from contextlib import asynccontextmanager
from typing import List, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from smartchair.api.schemas import (
    BatchRequest,
    BatchResponse,
    CloseRequest,
    CloseResponse,
    HealthResponse,
    SessionSummary,
)
from smartchair.core.errors import (
    AlreadyClosed,
    DuplicateSeq,
    SchemaError,
    SeqRegression,
    SessionNotSealed,
    StoreError,
    UnknownSession,
)
from smartchair.services.session_store import SessionStore

logger = logging.getLogger(__name__)

# 存储异常与 HTTP 状态码的对应关系，未列出的视为服务端错误
_STATUS_BY_ERROR = (
    (SchemaError, 400),
    (UnknownSession, 404),
    (AlreadyClosed, 409),
    (SeqRegression, 409),
    (SessionNotSealed, 409),
)


def _status_for(error: StoreError) -> int:
    for error_type, status in _STATUS_BY_ERROR:
        if isinstance(error, error_type):
            return status
    return 500


def create_app(store: SessionStore) -> FastAPI:
    """
    创建网关应用

    Args:
        store: 会话存储

    Returns:
        FastAPI 应用
    """

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        logger.info(f"Gateway started, storage root {store.root}")
        yield
        # 每个批次在确认前已落盘，这里没有待刷新的缓冲
        logger.info(f"Gateway stopped with {len(store.list_sessions())} sessions on disk")

    app = FastAPI(title="smartchair ingest gateway", version="1", lifespan=lifespan)
    app.state.store = store

    @app.exception_handler(StoreError)
    async def handle_store_error(request: Request, exc: StoreError):
        status = _status_for(exc)
        if status >= 500:
            logger.error(f"Storage failure on {request.url.path}: {exc.message}")
        return JSONResponse(exc.to_dict(), status_code=status)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        error = SchemaError("Request body does not match the schema", errors=jsonable_errors(exc))
        return JSONResponse(error.to_dict(), status_code=400)

    @app.get("/v1/healthz", response_model=HealthResponse)
    def healthz():
        return HealthResponse(status="ok", sessions=len(store.list_sessions()))

    @app.post("/v1/sessions/{player_id}/{session_id}/batches", response_model=BatchResponse)
    def post_batch(player_id: str, session_id: str, batch: BatchRequest):
        try:
            ack = store.post_batch(player_id, session_id, batch.seq, batch.samples)
        except DuplicateSeq as dup:
            # 重复批次幂等确认，不使用 409
            return BatchResponse(accepted_count=dup.accepted_count, next_expected_seq=dup.next_expected_seq)
        return BatchResponse(**ack.to_dict())

    @app.post("/v1/sessions/{player_id}/{session_id}/close", response_model=CloseResponse)
    def close_session(player_id: str, session_id: str, body: CloseRequest):
        log = store.close_session(player_id, session_id, body.skill)
        return CloseResponse(player_id=player_id, session_id=session_id, skill=log.skill, sample_count=log.n_samples)

    @app.get("/v1/sessions", response_model=List[SessionSummary])
    def list_sessions(status: Optional[str] = None):
        return [SessionSummary(**s) for s in store.list_sessions(status)]

    @app.get("/v1/sessions/{player_id}/{session_id}", response_model=SessionSummary)
    def session_info(player_id: str, session_id: str):
        return SessionSummary(**store.session_info(player_id, session_id))

    return app


def jsonable_errors(exc: RequestValidationError) -> list:
    """提取可序列化的校验错误(位置与说明)"""
    return [{"loc": [str(part) for part in err.get("loc", ())], "msg": err.get("msg", "")} for err in exc.errors()]


def serve(host: str, port: int, store_root: str, max_batch_size: int, log_level: str = "info") -> None:
    """
    启动网关直到收到终止信号

    Args:
        host: 监听地址
        port: 监听端口
        store_root: 存储根目录
        max_batch_size: 单批次最大样本数
        log_level: uvicorn 日志级别
    """
    import uvicorn

    store = SessionStore(store_root, max_batch_size=max_batch_size)
    app = create_app(store)
    logger.info(f"Starting gateway on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level=log_level.lower())
