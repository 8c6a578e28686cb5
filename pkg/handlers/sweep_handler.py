#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
参数扫描处理器

每个取值在独立的平台实例上运行；--jobs 大于1时用进程池并行，
结果总是按取值顺序合并，与完成顺序无关。
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

from builders.report_builder import ReportBuilder
from config.platform_config import PlatformConfig
from energy.models import DynamicCostTable
from handlers.scenario_handler import ScenarioHandler
from parsers.scenario_parser import RunBenchmark, ScenarioParser
from parsers.sweep_parser import SweepParser, SweepSpec
from workload.benchmark import run_benchmark

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("value", "exit_rate", "mean_cycles", "mean_energy_j", "speedup", "energy_gain", "power_ratio")


def run_point(run: RunBenchmark, config: PlatformConfig, costs: DynamicCostTable) -> Dict:
    """一个扫描点（进程池里执行，参数与返回值都可以序列化）"""
    result = run_benchmark(
        ScenarioParser.load_model(run),
        run.policy,
        run.mapping,
        run.samples,
        config,
        costs,
        mode=run.mode,
        shards=run.shards,
        slot=run.slot,
        name=run.name,
    )
    return result.to_dict()


class SweepHandler:
    """参数扫描处理器"""

    def __init__(self, output_dir: Path, jobs: int = 1):
        self.output_dir = Path(output_dir)
        self.jobs = max(1, jobs)

    def handle(self, spec: SweepSpec) -> Dict:
        """
        执行扫描并写出 <name>.json 和 <name>.csv

        Returns:
            Dict: 扫描报告内容（不含 metadata）
        """
        scenario = SweepParser.load_scenario(spec)
        config = ScenarioHandler(self.output_dir).prepare(scenario)
        costs = ScenarioParser.load_costs(scenario)
        points = SweepParser.points(spec, scenario)
        logger.info("[SEND] 扫描 %s: %s 共 %d 个取值, jobs=%d", spec.name, spec.parameter, len(points), self.jobs)

        if self.jobs > 1:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                results = list(pool.map(run_point, points, [config] * len(points), [costs] * len(points)))
        else:
            results = [run_point(point, config, costs) for point in points]

        baseline: Optional[Dict] = None
        if spec.baseline:
            baseline = run_point(scenario.benchmark(spec.baseline), config, costs)

        rows: List[Dict] = []
        for value, result in zip(spec.values, results):
            row = {
                "value": value,
                "exit_rate": result["exit_rate"],
                "mean_cycles": result["mean_cycles"],
                "mean_energy_j": result["mean_energy_j"],
            }
            if baseline is not None:
                speedup = baseline["mean_cycles"] / result["mean_cycles"]
                gain = baseline["mean_energy_j"] / result["mean_energy_j"]
                row.update(speedup=speedup, energy_gain=gain, power_ratio=speedup / gain)
            rows.append(row)

        content = {
            "sweep": spec.name,
            "scenario": scenario.name,
            "run": spec.run,
            "parameter": spec.parameter,
            "baseline": baseline,
            "rows": rows,
        }
        self.output_dir.mkdir(parents=True, exist_ok=True)
        (self.output_dir / f"{spec.name}.json").write_text(
            ReportBuilder.to_json(ReportBuilder.wrap(content, f"sweep {spec.name}")), encoding="utf-8"
        )
        (self.output_dir / f"{spec.name}.csv").write_text(ReportBuilder.csv_table(SWEEP_COLUMNS, rows), encoding="utf-8")
        logger.info("[OK] 扫描 %s 完成", spec.name)
        return content
