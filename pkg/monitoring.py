"""
性能监控模块
收集基准测试与命令执行的耗时指标，并通过 psutil 记录进程资源占用
"""
import os
import time
import threading
from contextlib import contextmanager
from typing import Dict, Any, Optional, Iterator
from datetime import datetime
from dataclasses import dataclass, field
from collections import defaultdict, deque

import psutil

from logging_config import logger


@dataclass
class PerformanceMetric:
    """性能指标数据类"""
    timestamp: datetime
    metric_name: str
    value: float
    tags: Dict[str, str] = field(default_factory=dict)


class PerformanceMonitor:
    """性能监控器"""

    def __init__(self, max_samples: int = 10000):
        self.metrics: Dict[str, deque] = defaultdict(lambda: deque(maxlen=max_samples))
        self.run_stats = {
            "total_runs": 0,
            "successful_runs": 0,
            "failed_runs": 0,
            "avg_wall_time": 0.0,
            "max_wall_time": 0.0,
            "min_wall_time": float('inf')
        }
        self.start_time = datetime.now()
        self._lock = threading.Lock()

    def record_metric(self, name: str, value: float, tags: Optional[Dict[str, str]] = None):
        """记录性能指标"""
        metric = PerformanceMetric(
            timestamp=datetime.now(),
            metric_name=name,
            value=value,
            tags=tags or {}
        )

        with self._lock:
            self.metrics[name].append(metric)

    @contextmanager
    def measure(self, name: str, **tags: str) -> Iterator[Dict[str, float]]:
        """计时上下文；退出时记录耗时，并把秒数写回 yield 出的字典"""
        timing: Dict[str, float] = {}
        start = time.perf_counter()
        try:
            yield timing
        finally:
            timing["elapsed"] = time.perf_counter() - start
            self.record_metric(name, timing["elapsed"], {k: str(v) for k, v in tags.items()})

    def record_run(self, success: bool, wall_time: float):
        """记录一次命令或基准运行"""
        with self._lock:
            stats = self.run_stats
            stats["total_runs"] += 1
            if success:
                stats["successful_runs"] += 1
            else:
                stats["failed_runs"] += 1

            total_time = stats["avg_wall_time"] * (stats["total_runs"] - 1) + wall_time
            stats["avg_wall_time"] = total_time / stats["total_runs"]
            stats["max_wall_time"] = max(stats["max_wall_time"], wall_time)
            stats["min_wall_time"] = min(stats["min_wall_time"], wall_time)

    def get_run_stats(self) -> Dict[str, Any]:
        """获取运行统计信息"""
        with self._lock:
            stats = self.run_stats.copy()
        stats["uptime"] = (datetime.now() - self.start_time).total_seconds()
        stats["success_rate"] = (
            stats["successful_runs"] / stats["total_runs"] if stats["total_runs"] else 0
        )
        return stats

    def get_metrics_summary(self, metric_name: str) -> Dict[str, float]:
        """获取指标摘要"""
        with self._lock:
            values = [m.value for m in self.metrics.get(metric_name, ())]

        if not values:
            return {}

        return {
            "count": len(values),
            "avg": sum(values) / len(values),
            "min": min(values),
            "max": max(values),
            "latest": values[-1]
        }

    def metric_names(self) -> list:
        with self._lock:
            return sorted(self.metrics)


def system_snapshot() -> Dict[str, Any]:
    """当前进程与系统的资源快照"""
    try:
        process = psutil.Process(os.getpid())
        memory = psutil.virtual_memory()
        return {
            "process_rss_mb": process.memory_info().rss / 1024 / 1024,
            "system_cpu_percent": psutil.cpu_percent(interval=None),
            "system_memory_percent": memory.percent,
        }
    except Exception as e:
        logger.warning(f"Failed to collect system metrics: {e}")
        return {}


def get_performance_report(monitor: PerformanceMonitor) -> Dict[str, Any]:
    """获取性能报告"""
    return {
        "timestamp": datetime.now().isoformat(),
        "run_stats": monitor.get_run_stats(),
        "timings": {name: monitor.get_metrics_summary(name) for name in monitor.metric_names()},
        "system": system_snapshot(),
    }
