"""
监控模块单元测试
"""
import pytest
from unittest.mock import patch, MagicMock

from monitoring import PerformanceMonitor, system_snapshot, get_performance_report


class TestPerformanceMonitor:
    """性能监控器测试类"""

    def test_record_metric(self):
        """测试记录性能指标"""
        monitor = PerformanceMonitor()

        monitor.record_metric("test_metric", 100.0, {"tag": "test"})

        summary = monitor.get_metrics_summary("test_metric")
        assert summary["count"] == 1
        assert summary["avg"] == 100.0
        assert summary["latest"] == 100.0

    def test_record_run(self):
        """测试记录运行统计"""
        monitor = PerformanceMonitor()

        monitor.record_run(True, 2.5)
        monitor.record_run(True, 1.5)
        monitor.record_run(False, 5.0)

        stats = monitor.get_run_stats()
        assert stats["total_runs"] == 3
        assert stats["successful_runs"] == 2
        assert stats["failed_runs"] == 1
        assert stats["success_rate"] == 2/3
        assert stats["max_wall_time"] == 5.0
        assert stats["min_wall_time"] == 1.5
        assert stats["avg_wall_time"] == pytest.approx(3.0)

    def test_measure_records_elapsed(self):
        """测试计时上下文"""
        monitor = PerformanceMonitor()

        with monitor.measure("det", method="bareiss", n=4) as timing:
            sum(range(1000))

        assert timing["elapsed"] >= 0
        summary = monitor.get_metrics_summary("det")
        assert summary["count"] == 1
        assert summary["latest"] == timing["elapsed"]
        assert monitor.metrics["det"][0].tags == {"method": "bareiss", "n": "4"}

    def test_measure_records_on_error(self):
        """测试异常退出时仍记录耗时"""
        monitor = PerformanceMonitor()

        with pytest.raises(ValueError):
            with monitor.measure("failing"):
                raise ValueError("boom")

        assert monitor.get_metrics_summary("failing")["count"] == 1

    def test_metrics_summary_empty(self):
        """测试空指标摘要"""
        monitor = PerformanceMonitor()
        assert monitor.get_metrics_summary("nonexistent") == {}
        assert monitor.metric_names() == []

    def test_max_samples(self):
        """测试样本数量上限"""
        monitor = PerformanceMonitor(max_samples=3)
        for value in range(5):
            monitor.record_metric("bounded", float(value))

        summary = monitor.get_metrics_summary("bounded")
        assert summary["count"] == 3
        assert summary["min"] == 2.0


class TestSystemSnapshot:
    """系统资源快照测试类"""

    @patch('monitoring.psutil')
    def test_system_snapshot(self, mock_psutil):
        """测试 psutil 快照"""
        process = MagicMock()
        process.memory_info.return_value.rss = 64 * 1024 * 1024
        mock_psutil.Process.return_value = process
        mock_psutil.cpu_percent.return_value = 12.5
        mock_psutil.virtual_memory.return_value.percent = 40.0

        snapshot = system_snapshot()
        assert snapshot == {
            "process_rss_mb": 64.0,
            "system_cpu_percent": 12.5,
            "system_memory_percent": 40.0,
        }

    @patch('monitoring.psutil')
    def test_system_snapshot_failure(self, mock_psutil):
        """测试 psutil 出错时返回空字典"""
        mock_psutil.Process.side_effect = RuntimeError("no access")
        assert system_snapshot() == {}

    def test_performance_report(self):
        """测试性能报告结构"""
        monitor = PerformanceMonitor()
        monitor.record_metric("det", 0.5)
        monitor.record_run(True, 0.5)

        report = get_performance_report(monitor)
        assert set(report) == {"timestamp", "run_stats", "timings", "system"}
        assert report["run_stats"]["total_runs"] == 1
        assert report["timings"]["det"]["count"] == 1


if __name__ == '__main__':
    pytest.main([__file__])
