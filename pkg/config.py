import os
from typing import Optional
from dotenv import load_dotenv
from exceptions import ConfigException, ErrorCode

# 加载 .env 文件中的环境变量
load_dotenv()


class Config:
    """配置管理类，提供统一的配置访问和验证"""

    # 整数配置项及其下限
    _INT_KEYS = {
        "DODGSON_ENUM_BOUND": ("7", 2),
        "DODGSON_LEIBNIZ_LIMIT": ("9", 1),
        "DODGSON_DET_POLY_LIMIT": ("7", 1),
        "DODGSON_REPAIR_RETRIES": ("10", 0),
        "DODGSON_SEED": ("0", 0),
        "DODGSON_CROSSCHECK_LIMIT": ("5", 0),
        "DODGSON_WORKERS": ("1", 1),
    }

    def __init__(self):
        self._validate_int_configs()

    def _get_env(self, key: str, default: Optional[str] = None, required: bool = False) -> str:
        """安全地获取环境变量"""
        value = os.getenv(key, default)
        if required and not value:
            raise ConfigException(
                f"Required environment variable {key} is not set",
                ErrorCode.CONFIG_ERROR,
            )
        return value or (default or "")

    def _get_int(self, key: str) -> int:
        default, _ = self._INT_KEYS[key]
        return int(self._get_env(key, default=default))

    def _validate_int_configs(self):
        """验证整数配置项"""
        invalid_configs = []
        for key, (default, minimum) in self._INT_KEYS.items():
            raw = self._get_env(key, default=default)
            try:
                if int(raw) < minimum:
                    invalid_configs.append(key)
            except ValueError:
                invalid_configs.append(key)

        if invalid_configs:
            raise ConfigException(
                f"Invalid numeric configuration: {', '.join(invalid_configs)}",
                ErrorCode.CONFIG_ERROR,
                details={"invalid_configs": invalid_configs},
            )

    # 枚举与验证
    @property
    def ENUM_BOUND(self) -> int:
        return self._get_int("DODGSON_ENUM_BOUND")

    @property
    def CROSSCHECK_LIMIT(self) -> int:
        return self._get_int("DODGSON_CROSSCHECK_LIMIT")

    @property
    def WORKERS(self) -> int:
        return self._get_int("DODGSON_WORKERS")

    # 行列式引擎
    @property
    def LEIBNIZ_LIMIT(self) -> int:
        return self._get_int("DODGSON_LEIBNIZ_LIMIT")

    @property
    def DET_POLY_LIMIT(self) -> int:
        return self._get_int("DODGSON_DET_POLY_LIMIT")

    @property
    def REPAIR_RETRIES(self) -> int:
        return self._get_int("DODGSON_REPAIR_RETRIES")

    @property
    def SEED(self) -> int:
        return self._get_int("DODGSON_SEED")

    # 日志
    @property
    def LOG_LEVEL(self) -> str:
        return self._get_env("LOG_LEVEL", default="WARNING").upper()

    @property
    def LOG_DIR(self) -> Optional[str]:
        return os.getenv("LOG_DIR") or None

    def get_config_summary(self) -> dict:
        """获取配置摘要"""
        return {
            "enum_bound": self.ENUM_BOUND,
            "leibniz_limit": self.LEIBNIZ_LIMIT,
            "det_poly_limit": self.DET_POLY_LIMIT,
            "repair_retries": self.REPAIR_RETRIES,
            "seed": self.SEED,
            "crosscheck_limit": self.CROSSCHECK_LIMIT,
            "workers": self.WORKERS,
            "log_level": self.LOG_LEVEL,
            "file_logging": bool(self.LOG_DIR),
        }


# 创建全局配置实例
config = Config()
