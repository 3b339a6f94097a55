"""
会话日志文件读写

格式：每行一个 JSON 对象 {"t","ax",...,"mz"}，旁挂 <player_id>.meta.json 记录 player_id 与 skill。
浮点数以最短往返表示写出，重新读取后逐位一致。
"""

import json
import logging
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np

from smartchair.core.errors import CorruptLog, MalformedRecord
from smartchair.models.sample import FIELDS, PlayerLog
from smartchair.services.telemetry import check_finite

logger = logging.getLogger(__name__)

LOG_SUFFIX = ".jsonl"
META_SUFFIX = ".meta.json"


def format_rows(data: np.ndarray) -> str:
    """将列式数组格式化为 JSONL 文本(每行以换行结尾)"""
    return "".join(json.dumps(dict(zip(FIELDS, row))) + "\n" for row in data.tolist())


def parse_lines(lines: Iterable[Union[str, bytes]], path: str, first_line: int = 1) -> np.ndarray:
    """
    解析 JSONL 行为列式数组

    Args:
        lines: 文本行
        path: 文件路径，仅用于错误信息
        first_line: 第一行的行号

    Returns:
        形状为 (N, 10) 的数组
    """
    rows = []
    for offset, line in enumerate(lines):
        number = first_line + offset
        try:
            record = json.loads(line)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise CorruptLog(path, number, f"unparsable record ({e})")
        if not isinstance(record, dict):
            raise CorruptLog(path, number, "record is not an object")
        try:
            rows.append([float(record[name]) for name in FIELDS])
        except KeyError as e:
            raise MalformedRecord(f"Missing field {e.args[0]} in {path} line {number}", field=e.args[0], line=number)
        except (TypeError, ValueError):
            raise MalformedRecord(f"Non-numeric field in {path} line {number}", line=number)

    data = np.array(rows, dtype=np.float64).reshape(-1, len(FIELDS))
    check_finite(data)
    return data


def write_log(log: PlayerLog, directory: Union[str, Path]) -> Path:
    """
    写出日志与元数据

    Args:
        log: 选手日志
        directory: 输出目录

    Returns:
        日志文件路径
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    log_path = directory / f"{log.player_id}{LOG_SUFFIX}"
    meta_path = directory / f"{log.player_id}{META_SUFFIX}"

    with open(log_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_rows(log.data))
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(log.metadata(), fh, sort_keys=True)

    logger.info(f"Wrote {log.n_samples} samples of {log.player_id} to {log_path}")
    return log_path


def read_log(path: Union[str, Path]) -> PlayerLog:
    path = Path(path)
    player_id = path.name[: -len(LOG_SUFFIX)]
    meta_path = path.with_name(f"{player_id}{META_SUFFIX}")
    if not meta_path.is_file():
        raise MalformedRecord(f"Missing skill metadata for player {player_id}", player_id=player_id)
    try:
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as e:
        raise MalformedRecord(f"Unreadable metadata for player {player_id}: {e}", player_id=player_id)
    if "skill" not in meta:
        raise MalformedRecord(f"Missing skill metadata for player {player_id}", field="skill", player_id=player_id)

    with open(path, "r", encoding="utf-8") as fh:
        data = parse_lines(fh, str(path))

    return PlayerLog(player_id=str(meta.get("player_id", player_id)), skill=meta["skill"], data=data)


def load_log_directory(directory: Union[str, Path]) -> List[PlayerLog]:
    """读取目录中的全部日志，按选手 ID 排序"""
    paths = sorted(Path(directory).glob(f"*{LOG_SUFFIX}"))
    logs = [read_log(p) for p in paths]
    logger.info(f"Loaded {len(logs)} logs from {directory}")
    return sorted(logs, key=lambda log: log.player_id)
