"""
异常处理模块单元测试
"""
import json

import pytest
from pydantic import ValidationError

from exceptions import (
    DodgsonException, ConfigException, MatrixException, ZeroDivisorException, ParseException,
    PairingException, SizeGuardException, BijectionException, InternalConsistencyException,
    ErrorCode, handle_exception, error_reporter, exit_code_for,
    EXIT_VERIFICATION_FAILED, EXIT_INPUT_ERROR, EXIT_DOMAIN_ERROR
)
from matchings import PairingPayload


class TestExceptions:
    """异常处理测试类"""

    def test_base_exception_creation(self):
        """测试基础异常创建"""
        exc = DodgsonException(
            message="Test error",
            error_code=ErrorCode.UNKNOWN_ERROR,
            details={"key": "value"},
        )

        assert exc.message == "Test error"
        assert exc.error_code == ErrorCode.UNKNOWN_ERROR
        assert exc.details == {"key": "value"}
        assert exc.traceback is not None

    def test_specific_exception_types(self):
        """测试特定异常类型"""
        for exc in (
            ConfigException("bad config", ErrorCode.CONFIG_ERROR),
            MatrixException("not square", ErrorCode.MATRIX_NOT_SQUARE),
            ZeroDivisorException("zero"),
            ParseException("bad token", ErrorCode.PARSE_ERROR),
            PairingException("bad pairing"),
            SizeGuardException("too big"),
            BijectionException("bad member", ErrorCode.NOT_IN_IMAGE),
            InternalConsistencyException("oops", ErrorCode.INTERNAL_CONSISTENCY),
        ):
            assert isinstance(exc, DodgsonException)

    def test_zero_divisor_carries_location(self):
        """测试零除数异常携带层号和位置"""
        exc = ZeroDivisorException("vanishing minor", layer=2, position=(1, 1))
        assert isinstance(exc, MatrixException)
        assert exc.error_code == ErrorCode.ZERO_DIVISOR
        assert exc.layer == 2
        assert exc.position == (1, 1)
        assert exc.details["layer"] == 2

    def test_pairing_exception_violations(self):
        """测试配对异常携带违规列表"""
        exc = PairingException("invalid", violations=["marriages not injective"])
        assert exc.error_code == ErrorCode.PAIRING_INVALID
        assert exc.violations == ["marriages not injective"]
        assert exc.details["violations"] == ["marriages not injective"]

    def test_handle_exception_zero_division(self):
        """测试处理 Python 原生除零"""
        wrapped = handle_exception(ZeroDivisionError("division by zero"), "test_context")
        assert isinstance(wrapped, ZeroDivisorException)
        assert wrapped.details["original_type"] == "ZeroDivisionError"

    def test_handle_exception_validation_error(self):
        """测试处理 pydantic 校验错误"""
        with pytest.raises(ValidationError) as exc_info:
            PairingPayload.model_validate({"n": "three"})
        wrapped = handle_exception(exc_info.value, "test_context")
        assert isinstance(wrapped, PairingException)
        assert wrapped.violations

    def test_handle_exception_json_error(self):
        """测试处理 JSON 解析错误"""
        with pytest.raises(json.JSONDecodeError) as exc_info:
            json.loads("{not json")
        wrapped = handle_exception(exc_info.value, "test_context")
        assert isinstance(wrapped, ParseException)
        assert "Malformed JSON" in wrapped.message

    def test_handle_exception_file_error(self):
        """测试处理文件错误"""
        wrapped = handle_exception(FileNotFoundError("missing.txt"), "test_context")
        assert wrapped.error_code == ErrorCode.FILE_ERROR

    def test_handle_exception_unknown_error(self):
        """测试处理未知错误"""
        wrapped = handle_exception(RuntimeError("Some random error"), "test_context")

        assert wrapped.error_code == ErrorCode.UNKNOWN_ERROR
        assert "Some random error" in wrapped.message

    def test_handle_exception_already_wrapped(self):
        """测试处理已包装的异常"""
        original_exc = MatrixException("Already wrapped", ErrorCode.MATRIX_NOT_SQUARE)
        wrapped = handle_exception(original_exc, "test_context")

        # 应该返回原异常，不做二次包装
        assert wrapped is original_exc

    def test_error_reporter(self):
        """测试错误报告器"""
        error_reporter.reset_stats()

        error_reporter.report_error(SizeGuardException("Error 1"))
        error_reporter.report_error(SizeGuardException("Error 2"))
        error_reporter.report_error(BijectionException("Error 3", ErrorCode.NOT_IN_IMAGE))

        stats = error_reporter.get_error_stats()
        assert stats[ErrorCode.SIZE_GUARD_EXCEEDED.value] == 2
        assert stats[ErrorCode.NOT_IN_IMAGE.value] == 1

        error_reporter.reset_stats()
        assert len(error_reporter.get_error_stats()) == 0


class TestExitCodes:
    """退出码映射测试类"""

    @pytest.mark.parametrize("exc, expected", [
        (InternalConsistencyException("identity", ErrorCode.IDENTITY_VIOLATION), EXIT_VERIFICATION_FAILED),
        (InternalConsistencyException("chain", ErrorCode.INTERNAL_CONSISTENCY), EXIT_VERIFICATION_FAILED),
        (SizeGuardException("n must be ≥ 2, got 1"), EXIT_INPUT_ERROR),
        (ParseException("token", ErrorCode.PARSE_ERROR), EXIT_INPUT_ERROR),
        (PairingException("invalid"), EXIT_INPUT_ERROR),
        (ConfigException("config", ErrorCode.CONFIG_ERROR), EXIT_INPUT_ERROR),
        (BijectionException("bad", ErrorCode.NOT_IN_IMAGE), EXIT_DOMAIN_ERROR),
        (BijectionException("good", ErrorCode.MISCLASSIFIED_INPUT), EXIT_DOMAIN_ERROR),
    ])
    def test_exit_code_for(self, exc, expected):
        """测试异常到退出码的映射"""
        assert exit_code_for(exc) == expected


class TestErrorCodes:
    """错误代码测试类"""

    def test_error_code_enum(self):
        """测试错误代码枚举"""
        assert ErrorCode.MATRIX_DIMENSION_ERROR.value == "MAT_001"
        assert ErrorCode.ZERO_DIVISOR.value == "MAT_004"
        assert ErrorCode.PAIRING_INVALID.value == "PAIR_001"
        assert ErrorCode.NOT_IN_IMAGE.value == "BIJ_001"
        assert ErrorCode.UNKNOWN_ERROR.value == "SYS_999"


if __name__ == '__main__':
    pytest.main([__file__])
