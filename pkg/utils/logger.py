#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
日志工具

setup_logging() 配置控制台日志；RunLogger 把每次完成的基准运行追加到JSON历史文件。
历史记录带时间戳，不进入确定性报告。
"""

import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, Union

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)-7s %(name)s: %(message)s"


def setup_logging(verbose: int = 0) -> None:
    """
    配置根日志记录器（输出到 stderr，stdout 留给报告）

    Args:
        verbose: 0 = WARNING，1 = INFO，2 及以上 = DEBUG
    """
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


class RunLogger:
    """运行历史记录器"""

    def __init__(self, log_file: Union[str, Path] = "runs_log.json"):
        """
        Args:
            log_file: 历史文件路径
        """
        self.log_file = Path(log_file)

    def log(self, scenario: str, run: Dict) -> None:
        """
        追加一条运行记录

        读取现有历史（不存在或损坏时从空列表开始），追加后写回。

        Args:
            scenario: 场景名
            run: 基准结果字典（BenchmarkResult.to_dict()）
        """
        entry = {
            "timestamp": datetime.now().isoformat(),
            "scenario": scenario,
            "run": run.get("name"),
            "model": run.get("model"),
            "policy": run.get("policy"),
            "mean_cycles": run.get("mean_cycles"),
            "mean_energy_j": run.get("mean_energy_j"),
            "exit_rate": run.get("exit_rate"),
        }

        try:
            try:
                logs = json.loads(self.log_file.read_text(encoding="utf-8"))
                if not isinstance(logs, list):
                    logs = []
            except FileNotFoundError:
                logs = []
            except json.JSONDecodeError:
                logger.warning("[WARN] 历史文件 %s 格式错误，将创建新文件", self.log_file)
                logs = []

            logs.append(entry)
            self.log_file.parent.mkdir(parents=True, exist_ok=True)
            self.log_file.write_text(json.dumps(logs, ensure_ascii=False, indent=2), encoding="utf-8")
            logger.info("[OK] 已记录运行到 %s: %s/%s", self.log_file, scenario, entry["run"])
        except OSError as e:
            # 历史记录失败不影响运行结果
            logger.error("[ERROR] 记录运行历史时出错: %s", e)
