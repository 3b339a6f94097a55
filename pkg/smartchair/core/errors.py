"""
异常定义 - 整个流水线共用的错误层级
"""

from typing import Any, Dict, Optional


class SmartChairError(Exception):
    """所有项目异常的基类"""

    error_code = "smartchair_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """转换为错误响应字典"""
        return {
            "error_code": self.error_code,
            "error_message": self.message,
            **self.details,
        }


class ConfigError(SmartChairError):
    error_code = "config_error"


# 原始数据相关
class SampleError(SmartChairError):
    error_code = "sample_error"


class NonFiniteChannel(SampleError):
    error_code = "non_finite_channel"

    def __init__(self, field: str, value: Any = None, index: Optional[int] = None):
        where = f" at sample {index}" if index is not None else ""
        super().__init__(f"Channel {field} is not finite{where}: {value!r}", field=field, index=index)
        self.field = field
        self.index = index


class NegativeTimestamp(SampleError):
    error_code = "negative_timestamp"

    def __init__(self, value: float, index: Optional[int] = None):
        where = f" at sample {index}" if index is not None else ""
        super().__init__(f"Timestamp is negative{where}: {value!r}", field="t", index=index)
        self.field = "t"
        self.index = index


class MalformedRecord(SampleError):
    error_code = "malformed_record"

    def __init__(self, message: str, field: Optional[str] = None, index: Optional[int] = None, **details: Any):
        super().__init__(message, field=field, index=index, **details)
        self.field = field
        self.index = index


class UnsortedLog(SampleError):
    error_code = "unsorted_log"

    def __init__(self, player_id: str, index: int):
        super().__init__(
            f"Timestamps of log {player_id} are not strictly increasing at sample {index}",
            player_id=player_id,
            index=index,
        )
        self.index = index


# 会话存储与采集网关
class StoreError(SmartChairError):
    error_code = "store_error"


class SchemaError(StoreError):
    error_code = "schema_error"


class DuplicateSeq(StoreError):
    """重复批次：幂等处理，返回原确认"""

    error_code = "duplicate_seq"

    def __init__(self, seq: int, accepted_count: int, next_expected_seq: int):
        super().__init__(
            f"Batch {seq} already persisted",
            seq=seq,
            accepted_count=accepted_count,
            next_expected_seq=next_expected_seq,
        )
        self.seq = seq
        self.accepted_count = accepted_count
        self.next_expected_seq = next_expected_seq


class SeqRegression(StoreError):
    error_code = "seq_regression"


class StorageError(StoreError):
    error_code = "storage_error"


class UnknownSession(StoreError):
    error_code = "unknown_session"

    def __init__(self, player_id: str, session_id: str):
        super().__init__(f"Unknown session {player_id}/{session_id}", player_id=player_id, session_id=session_id)


class AlreadyClosed(StoreError):
    error_code = "already_closed"

    def __init__(self, player_id: str, session_id: str):
        super().__init__(f"Session {player_id}/{session_id} is already closed", player_id=player_id, session_id=session_id)


class SessionNotSealed(StoreError):
    error_code = "session_not_sealed"

    def __init__(self, player_id: str, session_id: str):
        super().__init__(f"Session {player_id}/{session_id} is still open", player_id=player_id, session_id=session_id)


class CorruptLog(StoreError):
    error_code = "corrupt_log"

    def __init__(self, path: str, line: int, reason: str):
        super().__init__(f"Corrupt log {path} at line {line}: {reason}", path=path, line=line)
        self.path = path
        self.line = line


class GatewayUnreachable(SmartChairError):
    error_code = "gateway_unreachable"


class BindError(ConfigError):
    error_code = "bind_error"


# 模拟器
class SimulationError(SmartChairError):
    error_code = "simulation_error"


class InvalidProfile(SimulationError):
    error_code = "invalid_profile"


class InvalidSpec(SimulationError):
    error_code = "invalid_spec"


# 特征提取
class FeatureError(SmartChairError):
    error_code = "feature_error"


class EmptySeries(FeatureError):
    error_code = "empty_series"


class InsufficientRows(FeatureError):
    error_code = "insufficient_rows"


# 分类器
class LearnerError(SmartChairError):
    error_code = "learner_error"


class NonBinaryLabels(LearnerError):
    error_code = "non_binary_labels"


class SingleClassTraining(LearnerError):
    error_code = "single_class_training"


class KTooLarge(LearnerError):
    error_code = "k_too_large"


class ModelFormatError(LearnerError):
    error_code = "model_format_error"


# 评估
class EvaluationError(SmartChairError):
    error_code = "evaluation_error"


class InfeasibleSplit(EvaluationError):
    error_code = "infeasible_split"


class SingleClassLabels(EvaluationError):
    error_code = "single_class_labels"


class DegenerateFold(EvaluationError):
    error_code = "degenerate_fold"


# CLI 退出码
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def exit_code_for(error: BaseException) -> int:
    """
    将异常映射为 CLI 退出码

    Args:
        error: 捕获的异常

    Returns:
        退出码
    """
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    data_errors = (SampleError, StoreError, FeatureError, SimulationError, GatewayUnreachable, LearnerError, EvaluationError)
    if isinstance(error, data_errors):
        return EXIT_DATA
    return EXIT_INTERNAL
