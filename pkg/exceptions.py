"""
自定义异常类和错误处理器
提供统一的错误处理机制，便于错误追踪，并把异常映射到命令行退出码
"""
import json
import traceback
from typing import Optional, Dict, Any
from enum import Enum

from pydantic import ValidationError


class ErrorCode(Enum):
    """错误代码枚举"""
    # 矩阵 / 行列式相关错误
    MATRIX_DIMENSION_ERROR = "MAT_001"
    MATRIX_NOT_SQUARE = "MAT_002"
    SIZE_GUARD_EXCEEDED = "MAT_003"
    ZERO_DIVISOR = "MAT_004"

    # 配对相关错误
    PAIRING_INVALID = "PAIR_001"
    PAIRING_WRONG_CLASS = "PAIR_002"

    # 双射相关错误
    NOT_IN_IMAGE = "BIJ_001"
    MISCLASSIFIED_INPUT = "BIJ_002"

    # 输入输出错误
    PARSE_ERROR = "IO_001"
    FILE_ERROR = "IO_002"

    # 系统错误
    CONFIG_ERROR = "SYS_001"
    INTERNAL_CONSISTENCY = "SYS_002"
    IDENTITY_VIOLATION = "SYS_003"
    UNKNOWN_ERROR = "SYS_999"


class DodgsonException(Exception):
    """基础异常类"""

    def __init__(
        self,
        message: str,
        error_code: ErrorCode = ErrorCode.UNKNOWN_ERROR,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        self.traceback = traceback.format_exc()


class ConfigException(DodgsonException):
    """配置相关异常"""
    pass


class MatrixException(DodgsonException):
    """矩阵维度、方阵要求、规模保护等异常"""
    pass


class ZeroDivisorException(MatrixException):
    """除数为零；凝聚算法据此触发修复策略"""

    def __init__(
        self,
        message: str,
        layer: Optional[int] = None,
        position: Optional[tuple] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        details = dict(details or {})
        details.update({"layer": layer, "position": position})
        super().__init__(message, ErrorCode.ZERO_DIVISOR, details)
        # layer: 消失子式的阶数 k；position: 该子式在第 k 层中的 (行, 列)，0 起
        self.layer = layer
        self.position = position


class ParseException(DodgsonException):
    """输入解析异常"""
    pass


class PairingException(DodgsonException):
    """配对数据不合法或类别不符"""

    def __init__(
        self,
        message: str,
        error_code: ErrorCode = ErrorCode.PAIRING_INVALID,
        violations: Optional[list] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        details = dict(details or {})
        self.violations = list(violations or [])
        details["violations"] = self.violations
        super().__init__(message, error_code, details)


class SizeGuardException(DodgsonException):
    """规模超出保护上限或低于最小规模"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, ErrorCode.SIZE_GUARD_EXCEEDED, details)


class BijectionException(DodgsonException):
    """映射 T 的逆或 S 作用在了不合适的元素上"""
    pass


class InternalConsistencyException(DodgsonException):
    """内部一致性被破坏（非整除、链条重复、恒等式不成立等）"""
    pass


def handle_exception(exc: Exception, context: str = "") -> DodgsonException:
    """
    统一异常处理函数

    Args:
        exc: 原始异常
        context: 异常发生的上下文

    Returns:
        DodgsonException: 包装后的异常
    """
    if isinstance(exc, DodgsonException):
        return exc

    error_message = str(exc)
    details = {"context": context, "original_type": type(exc).__name__}

    if isinstance(exc, ZeroDivisionError):
        return ZeroDivisorException(f"Division by zero in {context}: {error_message}", details=details)

    if isinstance(exc, ValidationError):
        return PairingException(
            f"Invalid payload in {context}",
            ErrorCode.PAIRING_INVALID,
            violations=[err.get("msg", "") for err in exc.errors()],
            details=details,
        )

    if isinstance(exc, json.JSONDecodeError):
        return ParseException(f"Malformed JSON in {context}: {error_message}", ErrorCode.PARSE_ERROR, details)

    if isinstance(exc, (ValueError, TypeError)):
        return ParseException(f"Invalid input in {context}: {error_message}", ErrorCode.PARSE_ERROR, details)

    if isinstance(exc, OSError):
        return ParseException(f"Cannot access file in {context}: {error_message}", ErrorCode.FILE_ERROR, details)

    # 默认处理
    return DodgsonException(
        message=f"Unknown error in {context}: {error_message}",
        error_code=ErrorCode.UNKNOWN_ERROR,
        details=details,
    )


# 退出码约定：0 成功，1 验证失败，2 输入/保护错误，3 领域错误
EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_DOMAIN_ERROR = 3

_EXIT_CODES = {
    ErrorCode.IDENTITY_VIOLATION: EXIT_VERIFICATION_FAILED,
    ErrorCode.INTERNAL_CONSISTENCY: EXIT_VERIFICATION_FAILED,
    ErrorCode.UNKNOWN_ERROR: EXIT_VERIFICATION_FAILED,
    ErrorCode.NOT_IN_IMAGE: EXIT_DOMAIN_ERROR,
    ErrorCode.MISCLASSIFIED_INPUT: EXIT_DOMAIN_ERROR,
}


def exit_code_for(exc: DodgsonException) -> int:
    """把异常映射为命令行退出码"""
    return _EXIT_CODES.get(exc.error_code, EXIT_INPUT_ERROR)


class ErrorReporter:
    """错误报告器，用于收集和报告错误统计"""

    def __init__(self):
        self.error_counts = {}

    def report_error(self, exception: DodgsonException):
        """报告错误"""
        error_code = exception.error_code.value
        self.error_counts[error_code] = self.error_counts.get(error_code, 0) + 1

    def get_error_stats(self) -> Dict[str, int]:
        """获取错误统计"""
        return self.error_counts.copy()

    def reset_stats(self):
        """重置统计"""
        self.error_counts.clear()


# 全局错误报告器实例
error_reporter = ErrorReporter()
