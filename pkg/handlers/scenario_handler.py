#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
场景处理器

执行一个场景：平台程序在一个平台实例上按序运行，每个 run-benchmark 指令
在自己的平台实例上运行；写出每个运行的结果文件、汇总报告和相对基线的比值表。
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

from builders.report_builder import RATIO_COLUMNS, ReportBuilder
from config.platform_config import PlatformConfig, validate
from energy.ledger import accrue
from energy.models import DynamicCostTable, LeakageModel
from hw.cpu import DumpImage
from hw.soc import Soc
from parsers.scenario_parser import RunBenchmark, Scenario, ScenarioParser
from sim.errors import ConfigError, ValidationFailed
from utils.json_loader import load_json_file
from utils.logger import RunLogger
from utils.trace import TraceWriter
from workload.benchmark import run_benchmark

logger = logging.getLogger(__name__)


class ScenarioHandler:
    """场景处理器"""

    def __init__(self, output_dir: Path, trace: bool = False, run_logger: Optional[RunLogger] = None):
        """
        Args:
            output_dir: 输出目录
            trace: 是否写出事件轨迹 CSV
            run_logger: 运行历史记录器，None 表示不记录
        """
        self.output_dir = Path(output_dir)
        self.trace = trace
        self.run_logger = run_logger

    def prepare(self, scenario: Scenario) -> PlatformConfig:
        """
        读取并校验场景引用的平台配置

        Raises:
            ValidationFailed: 配置不变量或指令引用检查失败
        """
        config = ScenarioParser.load_config(scenario)
        report = validate(config)
        if not report.ok:
            raise ValidationFailed(report, scenario.config or "<default config>")
        report = ScenarioParser.check(scenario, config)
        if not report.ok:
            raise ValidationFailed(report, scenario.name)
        return config

    def handle(self, scenario: Scenario, baseline: Optional[str] = None) -> Dict:
        """
        执行场景并写出结果

        Args:
            scenario: 已解析的场景
            baseline: 基线运行名，覆盖场景里的 baseline

        Returns:
            Dict: 汇总报告内容（不含 metadata）
        """
        config = self.prepare(scenario)
        costs = ScenarioParser.load_costs(scenario)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        trace = TraceWriter.open(self.output_dir / f"{scenario.name}-trace.csv") if self.trace else None
        logger.info("[SEND] 场景 %s: %d 条平台指令, %d 个基准运行", scenario.name, len(scenario.program), len(scenario.benchmarks))

        try:
            platform = self._run_program(scenario, config, costs, trace) if scenario.program else None
            runs = [self._run_benchmark(scenario, run, config, costs, trace) for run in scenario.benchmarks]
        finally:
            if trace is not None:
                trace.close()

        baseline = baseline or scenario.baseline
        ratios = ReportBuilder.ratio_rows(runs + self._prior_runs(baseline, runs), baseline)
        content = {
            "scenario": scenario.name,
            "seed": scenario.seed,
            "config": config.model_dump(mode="json"),
            "costs": costs.model_dump(mode="json"),
            "platform": platform,
            "runs": runs,
            "baseline": baseline,
            "ratios": ratios,
        }
        self._write("report.json", ReportBuilder.to_json(ReportBuilder.wrap(content, f"run {scenario.name}")))
        if ratios:
            self._write("ratios.csv", ReportBuilder.csv_table(RATIO_COLUMNS, ratios))
        logger.info("[OK] 场景 %s 完成，结果写入 %s", scenario.name, self.output_dir)
        return content

    def _dump_target(self, directive):
        if isinstance(directive, DumpImage) and not Path(directive.file).is_absolute():
            return directive.model_copy(update={"file": str(self.output_dir / directive.file)})
        return directive

    def _run_program(self, scenario: Scenario, config: PlatformConfig, costs: DynamicCostTable, trace) -> Dict:
        soc = Soc.build(config, trace)
        summary = soc.run([self._dump_target(d) for d in scenario.program])
        ledger = accrue(summary, costs, LeakageModel.from_config(config), config.clock_hz)
        return {
            "final_cycle": summary.final_time,
            "events_processed": summary.events_processed,
            "activity": summary.activity,
            "residency": summary.residency,
            "status": soc.status(),
            "energy": ledger.to_dict(),
        }

    def _run_benchmark(
        self, scenario: Scenario, run: RunBenchmark, config: PlatformConfig, costs: DynamicCostTable, trace
    ) -> Dict:
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
            trace=trace,
        )
        data = result.to_dict()
        self._write(f"{run.name}.json", ReportBuilder.to_json(ReportBuilder.wrap(data, f"run {scenario.name}")))
        if self.run_logger is not None:
            self.run_logger.log(scenario.name, data)
        return data

    def _prior_runs(self, baseline: Optional[str], runs: List[Dict]) -> List[Dict]:
        """基线不在本场景里时，从输出目录读取同名的已有运行结果"""
        if baseline is None or any(run["name"] == baseline for run in runs):
            return []
        path = self.output_dir / f"{baseline}.json"
        if not path.is_file():
            raise ConfigError(f"baseline run {baseline!r} not found in this scenario or {self.output_dir}")
        logger.info("[RECV] 使用已有基线结果 %s", path)
        return [ReportBuilder.strip_metadata(load_json_file(path))]

    def _write(self, name: str, text: str) -> None:
        (self.output_dir / name).write_text(text, encoding="utf-8")
