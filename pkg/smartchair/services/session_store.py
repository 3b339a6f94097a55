"""
会话存储 - 采集网关的追加写持久化层

目录结构: <root>/<player_id>/<session_id>/
    samples.jsonl  样本行，仅追加
    batches.jsonl  提交记录，每个批次一行 {seq, offset, length, count, last_t, sha256}
    meta.json      会话状态 {player_id, session_id, status, skill, gaps, created_at}

一个批次只有在其提交记录落盘后才算持久化；重启时截断提交记录之后的残留字节。
"""

import hashlib
import json
import logging
import os
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from smartchair.core.errors import (
    AlreadyClosed,
    CorruptLog,
    DuplicateSeq,
    SampleError,
    SchemaError,
    SeqRegression,
    SessionNotSealed,
    StorageError,
    UnknownSession,
)
from smartchair.models.sample import FIELDS, PlayerLog
from smartchair.services.log_io import format_rows, parse_lines
from smartchair.services.telemetry import validate_sample

logger = logging.getLogger(__name__)

SAMPLES_FILE = "samples.jsonl"
BATCHES_FILE = "batches.jsonl"
META_FILE = "meta.json"

STATUS_OPEN = "open"
STATUS_SEALED = "sealed"

# 选手与会话 ID 直接作为目录名
_ID_PATTERN = re.compile(r"^[A-Za-z0-9_-][A-Za-z0-9_.-]{0,127}$")


def is_valid_id(value: str) -> bool:
    return isinstance(value, str) and bool(_ID_PATTERN.match(value))


@dataclass
class BatchAck:
    """批次确认"""

    accepted_count: int
    next_expected_seq: int
    gap: Optional[Tuple[int, int]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"accepted_count": self.accepted_count, "next_expected_seq": self.next_expected_seq}


@dataclass
class _Session:
    player_id: str
    session_id: str
    directory: Path
    meta: Dict[str, Any]
    commits: Dict[int, Dict[str, Any]] = field(default_factory=dict)
    next_seq: int = 0
    last_t: Optional[float] = None
    committed_bytes: int = 0
    committed_record_bytes: int = 0
    committed_lines: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def sealed(self) -> bool:
        return self.meta.get("status") == STATUS_SEALED

    def summary(self) -> Dict[str, Any]:
        return {
            "player_id": self.player_id,
            "session_id": self.session_id,
            "status": self.meta.get("status"),
            "skill": self.meta.get("skill"),
            "gaps": self.meta.get("gaps", []),
            "sample_count": self.committed_lines,
            "batch_count": len(self.commits),
            "next_expected_seq": self.next_seq,
        }


class SessionStore:
    """按 (player_id, session_id) 组织的追加写会话存储"""

    def __init__(self, root: Union[str, Path], max_batch_size: int = 1000, durable: bool = True):
        """
        初始化会话存储并恢复磁盘上已有的会话

        Args:
            root: 存储根目录
            max_batch_size: 单个批次允许的最大样本数
            durable: 是否在每次提交后 fsync
        """
        self.root = Path(root)
        self.max_batch_size = max_batch_size
        self.durable = durable
        self._sessions: Dict[Tuple[str, str], _Session] = {}
        self._lock = threading.RLock()

        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Cannot create storage root {self.root}: {e}")
        self.recover()

    # ---- 恢复 ----

    def recover(self) -> int:
        """
        扫描存储根目录，重建索引并截断残缺批次

        Returns:
            恢复的会话数量
        """
        with self._lock:
            self._sessions.clear()
            for meta_path in sorted(self.root.glob(f"*/*/{META_FILE}")):
                try:
                    session = self._recover_session(meta_path.parent)
                except (OSError, json.JSONDecodeError) as e:
                    logger.error(f"Skipping unreadable session {meta_path.parent}: {e}")
                    continue
                self._sessions[(session.player_id, session.session_id)] = session
            logger.info(f"Recovered {len(self._sessions)} sessions from {self.root}")
            return len(self._sessions)

    def _recover_session(self, directory: Path) -> _Session:
        with open(directory / META_FILE, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
        session = _Session(
            player_id=meta["player_id"],
            session_id=meta["session_id"],
            directory=directory,
            meta=meta,
        )

        batches_path = directory / BATCHES_FILE
        raw = batches_path.read_bytes() if batches_path.exists() else b""
        good_end = 0
        for line in raw.splitlines(keepends=True):
            if not line.endswith(b"\n"):
                break
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                break
            session.commits[record["seq"]] = record
            good_end += len(line)
        session.committed_record_bytes = good_end
        if good_end < len(raw):
            logger.warning(f"Truncating torn commit record in {batches_path}")
            with open(batches_path, "r+b") as fh:
                fh.truncate(good_end)

        for record in session.commits.values():
            session.next_seq = max(session.next_seq, record["seq"] + 1)
            session.committed_bytes = max(session.committed_bytes, record["offset"] + record["length"])
            session.committed_lines += record["count"]
            if record["count"]:
                last_t = record["last_t"]
                session.last_t = last_t if session.last_t is None else max(session.last_t, last_t)

        # 缺口以提交记录为准
        seqs = sorted(session.commits)
        session.meta["gaps"] = [[a + 1, b - 1] for a, b in zip([-1] + seqs, seqs) if b - a > 1]

        samples_path = directory / SAMPLES_FILE
        size = samples_path.stat().st_size if samples_path.exists() else 0
        if size > session.committed_bytes:
            # 未提交的残缺批次
            logger.warning(f"Truncating {size - session.committed_bytes} uncommitted bytes in {samples_path}")
            with open(samples_path, "r+b") as fh:
                fh.truncate(session.committed_bytes)
        elif size < session.committed_bytes:
            logger.error(f"{samples_path} is shorter than its commit records; log is corrupt")

        return session

    # ---- 写入 ----

    def _get(self, player_id: str, session_id: str) -> _Session:
        with self._lock:
            session = self._sessions.get((player_id, session_id))
        if session is None:
            raise UnknownSession(player_id, session_id)
        return session

    def _get_or_create(self, player_id: str, session_id: str) -> _Session:
        with self._lock:
            session = self._sessions.get((player_id, session_id))
            if session is not None:
                return session

            directory = self.root / player_id / session_id
            meta = {
                "player_id": player_id,
                "session_id": session_id,
                "status": STATUS_OPEN,
                "skill": None,
                "gaps": [],
                "created_at": datetime.now().isoformat(),
            }
            try:
                directory.mkdir(parents=True, exist_ok=True)
                self._write_meta(directory, meta)
            except OSError as e:
                raise StorageError(f"Cannot create session {player_id}/{session_id}: {e}")
            session = _Session(player_id=player_id, session_id=session_id, directory=directory, meta=meta)
            self._sessions[(player_id, session_id)] = session
            logger.info(f"Opened session {player_id}/{session_id}")
            return session

    def _write_meta(self, directory: Path, meta: Dict[str, Any]) -> None:
        tmp_path = directory / f"{META_FILE}.tmp"
        with open(tmp_path, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, sort_keys=True)
            fh.flush()
            if self.durable:
                os.fsync(fh.fileno())
        os.replace(tmp_path, directory / META_FILE)

    def _append(self, path: Path, offset: int, payload: bytes) -> None:
        # 先截掉 offset 之后未提交的字节，失败的写入不会残留在已提交数据之后
        with open(path, "ab") as fh:
            fh.truncate(offset)
            fh.write(payload)
            fh.flush()
            if self.durable:
                os.fsync(fh.fileno())

    def _validate_batch(self, seq: Any, samples: Any) -> np.ndarray:
        if isinstance(seq, bool) or not isinstance(seq, int) or seq < 0:
            raise SchemaError(f"seq must be a non-negative integer, got {seq!r}", field="seq")
        if not isinstance(samples, (list, tuple)):
            raise SchemaError("samples must be an array", field="samples")
        if len(samples) > self.max_batch_size:
            raise SchemaError(f"Batch holds {len(samples)} samples, limit is {self.max_batch_size}", field="samples")

        rows = []
        for index, raw in enumerate(samples):
            try:
                rows.append(validate_sample(raw, index=index).as_row())
            except SampleError as e:
                raise SchemaError(f"Sample {index}: {e.message}", index=index, field=e.details.get("field"))

        data = np.array(rows, dtype=np.float64).reshape(-1, len(FIELDS))
        if data.shape[0] > 1:
            bad = np.flatnonzero(np.diff(data[:, 0]) <= 0)
            if bad.size:
                index = int(bad[0]) + 1
                raise SchemaError(f"Sample {index}: timestamps not strictly increasing", index=index, field="t")
        return data

    def post_batch(self, player_id: str, session_id: str, seq: int, samples: Sequence[Mapping[str, Any]]) -> BatchAck:
        """
        追加一个批次

        批次要么整体持久化，要么完全不写入。重复序号幂等确认；跳号时接受批次并在元数据中记录缺口。

        Args:
            player_id: 选手 ID
            session_id: 会话 ID
            seq: 批次序号，从 0 开始连续递增
            samples: 样本字典列表

        Returns:
            批次确认
        """
        if not is_valid_id(player_id) or not is_valid_id(session_id):
            raise SchemaError(f"Invalid session path {player_id!r}/{session_id!r}", field="path")
        data = self._validate_batch(seq, samples)
        session = self._get_or_create(player_id, session_id)

        with session.lock:
            if session.sealed:
                raise AlreadyClosed(player_id, session_id)

            if seq < session.next_seq:
                record = session.commits.get(seq)
                if record is None:
                    raise SeqRegression(
                        f"Batch {seq} falls inside a recorded gap; next expected is {session.next_seq}",
                        seq=seq,
                        next_expected_seq=session.next_seq,
                    )
                logger.info(f"Duplicate batch {seq} for {player_id}/{session_id}, re-acknowledging")
                raise DuplicateSeq(seq, record["count"], session.next_seq)

            if data.shape[0] and session.last_t is not None and data[0, 0] <= session.last_t:
                raise SchemaError(
                    f"Sample 0: timestamp {data[0, 0]!r} regresses behind {session.last_t!r}", index=0, field="t"
                )

            gap = None
            if seq > session.next_seq:
                gap = (session.next_seq, seq - 1)
                logger.warning(f"Gap in {player_id}/{session_id}: batches {gap[0]}..{gap[1]} missing")

            payload = format_rows(data).encode("utf-8")
            record = {
                "seq": seq,
                "offset": session.committed_bytes,
                "length": len(payload),
                "count": int(data.shape[0]),
                "last_t": float(data[-1, 0]) if data.shape[0] else None,
                "sha256": hashlib.sha256(payload).hexdigest(),
            }
            line = (json.dumps(record, sort_keys=True) + "\n").encode("utf-8")
            try:
                self._append(session.directory / SAMPLES_FILE, session.committed_bytes, payload)
                self._append(session.directory / BATCHES_FILE, session.committed_record_bytes, line)
            except OSError as e:
                # 残留字节在下一次写入或恢复时被截断
                raise StorageError(f"Failed to persist batch {seq} of {player_id}/{session_id}: {e}")

            session.commits[seq] = record
            session.next_seq = seq + 1
            session.committed_bytes += len(payload)
            session.committed_record_bytes += len(line)
            session.committed_lines += record["count"]
            if record["count"]:
                session.last_t = record["last_t"]
            if gap is not None:
                session.meta.setdefault("gaps", []).append(list(gap))
                try:
                    self._write_meta(session.directory, session.meta)
                except OSError as e:
                    logger.error(f"Gap metadata of {player_id}/{session_id} not written, recovery will rebuild it: {e}")

            return BatchAck(accepted_count=record["count"], next_expected_seq=session.next_seq, gap=gap)

    def close_session(self, player_id: str, session_id: str, skill: int) -> PlayerLog:
        """
        封存会话并记录技能标签

        Args:
            player_id: 选手 ID
            session_id: 会话 ID
            skill: 技能标签 0 或 1

        Returns:
            封存后的选手日志
        """
        if isinstance(skill, bool) or skill not in (0, 1):
            raise SchemaError(f"skill must be 0 or 1, got {skill!r}", field="skill")
        session = self._get(player_id, session_id)
        with session.lock:
            if session.sealed:
                raise AlreadyClosed(player_id, session_id)
            meta = dict(session.meta, status=STATUS_SEALED, skill=skill, sealed_at=datetime.now().isoformat())
            try:
                self._write_meta(session.directory, meta)
            except OSError as e:
                raise StorageError(f"Failed to seal {player_id}/{session_id}: {e}")
            session.meta = meta
        logger.info(f"Sealed session {player_id}/{session_id} with skill {skill}")
        return self.load_log(player_id, session_id)

    # ---- 读取 ----

    def load_log(self, player_id: str, session_id: str) -> PlayerLog:
        """
        读取已封存会话的日志，并按提交记录校验每个批次

        Args:
            player_id: 选手 ID
            session_id: 会话 ID

        Returns:
            按时间排序的选手日志
        """
        session = self._get(player_id, session_id)
        if not session.sealed:
            raise SessionNotSealed(player_id, session_id)

        path = session.directory / SAMPLES_FILE
        try:
            content = path.read_bytes() if path.exists() else b""
        except OSError as e:
            raise StorageError(f"Cannot read {path}: {e}")

        chunks = []
        line = 1
        for seq in sorted(session.commits):
            record = session.commits[seq]
            chunk = content[record["offset"]:record["offset"] + record["length"]]
            lines = chunk.splitlines()
            if hashlib.sha256(chunk).hexdigest() != record["sha256"]:
                # 先按行解析以定位损坏位置，解析都通过则报告该批次首行
                parse_lines(lines, str(path), first_line=line)
                if len(lines) != record["count"]:
                    raise CorruptLog(str(path), line + len(lines), "batch is truncated")
                raise CorruptLog(str(path), line, f"checksum mismatch in batch {seq}")
            chunks.append(parse_lines(lines, str(path), first_line=line))
            line += record["count"]

        data = np.vstack(chunks) if chunks else np.empty((0, len(FIELDS)))
        return PlayerLog(player_id=player_id, skill=session.meta["skill"], data=data, session_id=session_id)

    def list_sessions(self, status: Optional[str] = None) -> List[Dict[str, Any]]:
        with self._lock:
            sessions = sorted(self._sessions.values(), key=lambda s: (s.player_id, s.session_id))
        return [s.summary() for s in sessions if status is None or s.meta.get("status") == status]

    def session_info(self, player_id: str, session_id: str) -> Dict[str, Any]:
        return self._get(player_id, session_id).summary()

    def load_sealed_logs(self) -> List[PlayerLog]:
        """读取全部已封存会话"""
        return [self.load_log(s["player_id"], s["session_id"]) for s in self.list_sessions(STATUS_SEALED)]
