#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
报告构建器

负责构建JSON报告、CSV表格和错误报告。
报告内容按键排序输出；时间戳和工具版本放在单独的 metadata 字段，
比较两次运行的报告时去掉 metadata 即可逐字节相同。
"""

import csv
import io
import json
from datetime import datetime
from importlib.metadata import PackageNotFoundError, version
from typing import Dict, Iterable, List, Optional, Sequence

from config.platform_config import ValidationReport
from sim.errors import FileFormatError, SimError

try:
    TOOL_VERSION = version("heep-sim")
except PackageNotFoundError:
    TOOL_VERSION = "0.1.0"

RATIO_COLUMNS = ("run", "baseline", "speedup", "energy_gain", "power_ratio", "exit_rate", "level")


class ReportBuilder:
    """报告构建器"""

    @staticmethod
    def to_json(data) -> str:
        """有序、缩进的JSON文本（以换行结尾）"""
        return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @staticmethod
    def metadata(command: str) -> Dict:
        return {
            "timestamp": datetime.now().isoformat(timespec="seconds"),
            "tool": "heep-sim",
            "version": TOOL_VERSION,
            "command": command,
        }

    @staticmethod
    def wrap(content: Dict, command: str) -> Dict:
        """给报告内容加上 metadata 字段"""
        report = dict(content)
        report["metadata"] = ReportBuilder.metadata(command)
        return report

    @staticmethod
    def strip_metadata(report: Dict) -> Dict:
        return {k: v for k, v in report.items() if k != "metadata"}

    @staticmethod
    def create_error_report(error: Exception, exit_code: int) -> Dict:
        """
        创建错误报告

        FileFormatError 附带文件、行号和字段路径；其他 SimError 只有类型和消息。
        OSError 记为 IOError 并带上出错路径，其余异常记为 InternalError。

        Args:
            error: 异常对象
            exit_code: CLI 退出码

        Returns:
            Dict: 错误报告
        """
        report = {
            "status": "error",
            "exit_code": exit_code,
            "error": type(error).__name__,
            "message": str(error),
        }
        if isinstance(error, FileFormatError):
            report["source"] = error.source
            report["line"] = error.line
            report["field"] = error.field
            report["message"] = error.message
        elif isinstance(error, OSError):
            report["error"] = "IOError"
            report["path"] = None if error.filename is None else str(error.filename)
        elif not isinstance(error, SimError):
            report["error"] = "InternalError"
        return report

    @staticmethod
    def create_validation_report(report: ValidationReport, source: str) -> Dict:
        return {
            "status": "valid" if report.ok else "invalid",
            "source": source,
            "errors": [{"field": e.field, "message": e.message} for e in report.errors],
        }

    @staticmethod
    def csv_table(columns: Sequence[str], rows: Iterable[Dict]) -> str:
        """按列顺序输出CSV，缺失的值留空"""
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ReportBuilder._cell(v) for k, v in row.items()})
        return buffer.getvalue()

    @staticmethod
    def _cell(value) -> str:
        if isinstance(value, float):
            return f"{value:.6g}"
        if value is None:
            return ""
        return str(value)

    @staticmethod
    def ratio_rows(runs: List[Dict], baseline: Optional[str]) -> List[Dict]:
        """
        构建相对基线的比值表

        Args:
            runs: 各基准运行的结果字典（BenchmarkResult.to_dict()）
            baseline: 基线运行名

        Returns:
            List[Dict]: 每个非基线运行一行，比值为内核级
        """
        by_name = {run["name"]: run for run in runs}
        if baseline is None or baseline not in by_name:
            return []
        base = by_name[baseline]
        rows = []
        for run in runs:
            if run["name"] == baseline:
                continue
            speedup = base["mean_cycles"] / run["mean_cycles"]
            gain = base["mean_energy_j"] / run["mean_energy_j"]
            rows.append(
                {
                    "run": run["name"],
                    "baseline": baseline,
                    "speedup": speedup,
                    "energy_gain": gain,
                    "power_ratio": speedup / gain,
                    "exit_rate": run["exit_rate"],
                    "level": "kernel",
                }
            )
        return rows
