"""
回放客户端 - 把日志按 1 秒切成批次并按序上传到采集网关
"""

import logging
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterator, Optional, Tuple

import numpy as np
import requests

from smartchair.core.errors import GatewayUnreachable, SchemaError, StoreError
from smartchair.models.sample import FIELDS, SAMPLE_PERIOD, PlayerLog

logger = logging.getLogger(__name__)

BATCH_SECONDS = 1.0


@dataclass
class ReplaySummary:
    """回放结果统计"""

    player_id: str
    session_id: str
    batches_sent: int = 0
    samples_sent: int = 0
    retries: int = 0
    gaps: int = 0
    closed: bool = False
    elapsed_seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def iter_batches(log: PlayerLog, batch_seconds: float = BATCH_SECONDS) -> Iterator[Tuple[int, np.ndarray]]:
    """
    按时间把日志切成批次

    Args:
        log: 选手日志
        batch_seconds: 每个批次覆盖的时长

    Returns:
        (时间槽序号, 样本数组) 迭代器，空的时间槽被跳过
    """
    if log.n_samples == 0:
        return
    times = log.times
    slots = np.floor((times - times[0] + SAMPLE_PERIOD / 2) / batch_seconds).astype(np.int64)
    slot_ids, starts, counts = np.unique(slots, return_index=True, return_counts=True)
    for slot, start, count in zip(slot_ids.tolist(), starts.tolist(), counts.tolist()):
        yield slot, log.data[start:start + count]


class ReplayClient:
    """向采集网关回放日志的客户端"""

    def __init__(self, base_url: str, session: Optional[Any] = None, config: Optional[Dict[str, Any]] = None):
        """
        初始化回放客户端

        Args:
            base_url: 网关地址，如 http://localhost:8000
            session: 兼容 requests.Session 接口的 HTTP 会话
            config: 配置字典
        """
        self.base_url = base_url.rstrip("/")
        self.session = session or requests.Session()
        self.config = config or {}

        # 重试配置
        self.max_retries = self.config.get("max_retries", 5)
        self.retry_delay = self.config.get("retry_delay", 0.5)
        self.timeout = self.config.get("timeout", 10.0)

    def _post(self, path: str, body: Dict[str, Any], summary: ReplaySummary) -> Dict[str, Any]:
        url = f"{self.base_url}{path}"
        last_error: Optional[str] = None

        for attempt in range(self.max_retries):
            if attempt:
                summary.retries += 1
                # 重试前等待
                time.sleep(self.retry_delay * attempt)
            try:
                response = self.session.post(url, json=body, timeout=self.timeout)
            except (requests.ConnectionError, requests.Timeout) as e:
                last_error = str(e)
                logger.warning(f"Transient failure posting {path} (attempt {attempt + 1}/{self.max_retries}): {e}")
                continue

            if response.status_code == 200:
                return response.json()
            if response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                logger.warning(f"Gateway error on {path} (attempt {attempt + 1}/{self.max_retries}): {response.text}")
                continue

            payload = response.json()
            # 关闭请求在连接中断后重试时，会话可能已经封存
            if attempt and payload.get("error_code") == "already_closed" and path.endswith("/close"):
                return payload
            error_type = SchemaError if response.status_code == 400 else StoreError
            raise error_type(f"Gateway rejected {path}: {payload.get('error_message', response.text)}", **payload)

        raise GatewayUnreachable(f"Gateway at {self.base_url} unreachable after {self.max_retries} attempts: {last_error}")

    def replay(
        self,
        log: PlayerLog,
        session_id: Optional[str] = None,
        speed: float = 0.0,
        close: bool = True,
    ) -> ReplaySummary:
        """
        回放一份日志

        Args:
            log: 选手日志
            session_id: 会话 ID，默认使用日志自带的 ID
            speed: 回放倍速，0 表示不限速
            close: 上传完成后是否以日志标签封存会话

        Returns:
            回放统计
        """
        session_id = session_id or log.session_id
        summary = ReplaySummary(player_id=log.player_id, session_id=session_id)
        base_path = f"/v1/sessions/{log.player_id}/{session_id}"
        started = time.monotonic()

        previous_slot = -1
        for seq, (slot, rows) in enumerate(iter_batches(log)):
            summary.gaps += slot - previous_slot - 1
            previous_slot = slot
            if speed > 0:
                delay = started + slot * BATCH_SECONDS / speed - time.monotonic()
                if delay > 0:
                    time.sleep(delay)

            body = {"seq": seq, "samples": [dict(zip(FIELDS, row)) for row in rows.tolist()]}
            ack = self._post(f"{base_path}/batches", body, summary)
            if ack["next_expected_seq"] != seq + 1:
                logger.warning(f"Gateway expects batch {ack['next_expected_seq']} after {seq} for {base_path}")
            summary.batches_sent += 1
            summary.samples_sent += ack["accepted_count"]

        if close:
            self._post(f"{base_path}/close", {"skill": log.skill}, summary)
            summary.closed = True

        summary.elapsed_seconds = time.monotonic() - started
        logger.info(
            f"Replayed {log.player_id}/{session_id}: {summary.batches_sent} batches, "
            f"{summary.retries} retries, {summary.gaps} empty seconds"
        )
        return summary
