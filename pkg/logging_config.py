"""
结构化日志系统
提供统一的日志记录功能，支持不同级别的日志和结构化输出
标准输出留给计算结果，日志一律写到标准错误或日志文件
"""
import logging
import json
import sys
from datetime import datetime, timezone
from typing import Dict, Any
from pathlib import Path

from config import config


# LogRecord 自带的属性，其余属性视为结构化上下文
_RESERVED_ATTRS = set(vars(logging.LogRecord("", 0, "", 0, "", (), None))) | {"message", "asctime"}


class StructuredFormatter(logging.Formatter):
    """结构化日志格式化器"""

    def format(self, record: logging.LogRecord) -> str:
        """格式化日志记录为JSON格式"""
        log_entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        # 添加额外的上下文信息
        for key, value in vars(record).items():
            if key not in _RESERVED_ATTRS and not key.startswith("_"):
                log_entry[key] = value

        # 添加异常信息
        if record.exc_info:
            log_entry['exception'] = self.formatException(record.exc_info)

        return json.dumps(log_entry, ensure_ascii=False, default=str)


class DodgsonLogger:
    """行列式工具专用日志器"""

    def __init__(self, name: str = "dodgson"):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False

        # 避免重复添加处理器
        if not self.logger.handlers:
            self._setup_handlers()

    def _setup_handlers(self):
        """设置日志处理器"""
        formatter = StructuredFormatter()

        # 控制台处理器（标准错误）
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, config.LOG_LEVEL, logging.WARNING))
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        # 文件处理器，仅在配置了 LOG_DIR 时启用
        if config.LOG_DIR:
            log_dir = Path(config.LOG_DIR)
            log_dir.mkdir(parents=True, exist_ok=True)

            file_handler = logging.FileHandler(log_dir / "dodgson.log", encoding='utf-8')
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)

            error_handler = logging.FileHandler(log_dir / "error.log", encoding='utf-8')
            error_handler.setLevel(logging.ERROR)
            error_handler.setFormatter(formatter)

            self.logger.addHandler(file_handler)
            self.logger.addHandler(error_handler)

    def _log_with_extra(self, level: str, message: str, exc_info: bool = False, **kwargs):
        """带额外信息的日志记录"""
        extra = {k: v for k, v in kwargs.items() if v is not None}
        getattr(self.logger, level)(message, extra=extra, exc_info=exc_info)

    def info(self, message: str, **kwargs):
        """记录信息日志"""
        self._log_with_extra('info', message, **kwargs)

    def debug(self, message: str, **kwargs):
        """记录调试日志"""
        self._log_with_extra('debug', message, **kwargs)

    def warning(self, message: str, **kwargs):
        """记录警告日志"""
        self._log_with_extra('warning', message, **kwargs)

    def error(self, message: str, **kwargs):
        """记录错误日志"""
        self._log_with_extra('error', message, **kwargs)

    def log_command_start(self, command: str, request_id: str, **kwargs):
        """记录命令开始"""
        self.info(
            f"Running command {command}",
            command=command,
            request_id=request_id,
            event="command_start",
            **kwargs
        )

    def log_command_end(self, command: str, request_id: str, execution_time: float, exit_code: int):
        """记录命令结束"""
        level = "info" if exit_code == 0 else "warning"
        self._log_with_extra(
            level,
            f"Command {command} finished with exit code {exit_code}",
            command=command,
            request_id=request_id,
            execution_time=execution_time,
            exit_code=exit_code,
            event="command_end"
        )

    def log_verification(self, kind: str, n: int, passed: bool, **kwargs):
        """记录恒等式验证结果"""
        level = "info" if passed else "error"
        self._log_with_extra(
            level,
            f"Identity verification ({kind}) for n={n}: {'PASS' if passed else 'FAIL'}",
            verification=kind,
            n=n,
            passed=passed,
            event="verification",
            **kwargs
        )

    def log_repair(self, retry: int, target_row: int, source_row: int, factor: int, layer: int, position: tuple):
        """记录凝聚算法的行修复"""
        self.debug(
            f"Repair {retry}: row {target_row} += {factor} * row {source_row}",
            retry=retry,
            target_row=target_row,
            source_row=source_row,
            factor=factor,
            layer=layer,
            position=position,
            event="condensation_repair"
        )

    def log_fallback(self, n: int, retries: int):
        """记录回退到 Bareiss 消元"""
        self.warning(
            f"Condensation gave up after {retries} repairs, using Bareiss elimination",
            n=n,
            retries=retries,
            event="condensation_fallback"
        )

    def log_performance_metrics(self, metrics: Dict[str, Any]):
        """记录性能指标"""
        self.info(
            "Performance metrics",
            **metrics,
            event="performance_metrics"
        )

    def log_rejected_input(self, exception: Exception, context: str = "", **kwargs):
        """记录被拒绝的输入（解析、参数、规模保护、领域错误），不带堆栈"""
        error_code = getattr(exception, "error_code", None)
        self.warning(
            f"Rejected input in {context}: {str(exception)}",
            exception_type=type(exception).__name__,
            error_code=error_code.value if error_code else None,
            context=context,
            event="rejected_input",
            **kwargs
        )

    def log_exception(self, exception: Exception, context: str = "", **kwargs):
        """记录异常"""
        error_code = getattr(exception, "error_code", None)
        self._log_with_extra(
            "error",
            f"Exception in {context}: {str(exception)}",
            exc_info=True,
            exception_type=type(exception).__name__,
            error_code=error_code.value if error_code else None,
            context=context,
            event="exception",
            **kwargs
        )


# 创建全局日志器实例
logger = DodgsonLogger()
