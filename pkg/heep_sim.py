#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
X-HEEP 事务级仿真器 - 命令行入口

子命令：
    validate <config>                 校验平台配置
    report-static <config> [--map]    面积/漏电静态分布
    run <scenario> [--baseline NAME]  执行场景
    sweep <sweep-spec> [--jobs N]     参数扫描
    calibrate <targets>               拟合动态单价表

退出码：0 成功；1 文件格式错误或校验失败；2 其他仿真错误。

使用前请先安装依赖：
    uv sync
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from builders.report_builder import ReportBuilder
from config.address_map import build_address_map
from config.platform_config import PlatformConfig, validate
from energy.calibration import calibrate, load_targets
from energy.ledger import static_report
from handlers.scenario_handler import ScenarioHandler
from handlers.sweep_handler import SweepHandler
from parsers.config_parser import ConfigParser
from parsers.scenario_parser import ScenarioParser
from parsers.sweep_parser import SweepParser
from sim.errors import FileFormatError, SimError, ValidationFailed
from utils.logger import RunLogger, setup_logging

logger = logging.getLogger("heep_sim")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SIM_ERROR = 2


class SimulatorCli:
    """命令行协调器：解析输入、调用处理器、输出报告"""

    def __init__(self, out=None):
        """
        Args:
            out: 报告输出流，缺省为 stdout
        """
        self.out = out or sys.stdout

    def _emit(self, report) -> None:
        self.out.write(ReportBuilder.to_json(report))

    def validate(self, config_path: str) -> int:
        config = ConfigParser.parse_file(config_path)
        report = validate(config)
        self._emit(ReportBuilder.create_validation_report(report, config_path))
        if not report.ok:
            logger.error("[ERROR] %s 校验失败: %s", config_path, ", ".join(report.fields()))
            return EXIT_INVALID
        logger.info("[OK] %s 校验通过", config_path)
        return EXIT_OK

    def _load_valid_config(self, config_path: str) -> PlatformConfig:
        config = ConfigParser.parse_file(config_path)
        report = validate(config)
        if not report.ok:
            raise ValidationFailed(report, config_path)
        return config

    def report_static(self, config_path: str, with_map: bool = False, output: Optional[str] = None) -> int:
        config = self._load_valid_config(config_path)
        content = static_report(config)
        if with_map:
            content["address_map"] = build_address_map(config).to_dict()
        report = ReportBuilder.wrap(content, f"report-static {config_path}")
        if output:
            path = Path(output)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(ReportBuilder.to_json(report), encoding="utf-8")
        self._emit(report)
        return EXIT_OK

    def run(self, scenario_path: str, output: str, baseline: Optional[str] = None, trace: bool = False) -> int:
        scenario = ScenarioParser.parse_file(scenario_path)
        out_dir = Path(output)
        handler = ScenarioHandler(out_dir, trace=trace, run_logger=RunLogger(out_dir / "runs_log.json"))
        content = handler.handle(scenario, baseline)
        self._emit({"scenario": content["scenario"], "output": str(out_dir), "ratios": content["ratios"]})
        return EXIT_OK

    def sweep(self, spec_path: str, output: str, jobs: int = 1) -> int:
        spec = SweepParser.parse_file(spec_path)
        content = SweepHandler(Path(output), jobs).handle(spec)
        self._emit({"sweep": content["sweep"], "output": output, "rows": content["rows"]})
        return EXIT_OK

    def calibrate(self, targets_path: str, output: str, config_path: Optional[str] = None) -> int:
        targets = load_targets(targets_path)
        config_path = config_path or targets.platform
        config = self._load_valid_config(config_path) if config_path else PlatformConfig()
        result = calibrate(targets, config)
        out_dir = Path(output)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "cost-table.json").write_text(ReportBuilder.to_json(result.costs.model_dump(mode="json")), encoding="utf-8")
        report = ReportBuilder.wrap(result.to_dict(), f"calibrate {targets_path}")
        (out_dir / "calibration.json").write_text(ReportBuilder.to_json(report), encoding="utf-8")
        self._emit(report)
        return EXIT_OK

    def dispatch(self, args: argparse.Namespace) -> int:
        """执行子命令并把异常映射成退出码"""
        try:
            if args.command == "validate":
                return self.validate(args.config)
            if args.command == "report-static":
                return self.report_static(args.config, args.map, args.output)
            if args.command == "run":
                return self.run(args.scenario, args.output, args.baseline, args.trace)
            if args.command == "sweep":
                return self.sweep(args.spec, args.output, args.jobs)
            return self.calibrate(args.targets, args.output, args.config)
        except (FileFormatError, ValidationFailed) as e:
            logger.error("[ERROR] %s", e)
            self._emit(self._error_report(e, EXIT_INVALID))
            return EXIT_INVALID
        except SimError as e:
            logger.error("[ERROR] %s: %s", type(e).__name__, e)
            self._emit(ReportBuilder.create_error_report(e, EXIT_SIM_ERROR))
            return EXIT_SIM_ERROR
        except OSError as e:
            # 输出目录不可写、镜像文件缺失等
            logger.error("[ERROR] 文件读写失败: %s", e)
            self._emit(ReportBuilder.create_error_report(e, EXIT_SIM_ERROR))
            return EXIT_SIM_ERROR

    @staticmethod
    def _error_report(error: SimError, code: int):
        if isinstance(error, ValidationFailed):
            report = ReportBuilder.create_validation_report(error.report, error.source)
            report["exit_code"] = code
            return report
        return ReportBuilder.create_error_report(error, code)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heep-sim", description="X-HEEP transaction-level simulator")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a platform config")
    p.add_argument("config")

    p = sub.add_parser("report-static", help="area and leakage breakdown")
    p.add_argument("config")
    p.add_argument("--map", action="store_true", help="include the address map")
    p.add_argument("-o", "--output", help="also write the report to this file")

    p = sub.add_parser("run", help="execute a scenario")
    p.add_argument("scenario")
    p.add_argument("--baseline", help="name of the baseline run")
    p.add_argument("--trace", action="store_true", help="write the event trace CSV")
    p.add_argument("-o", "--output", default="out", help="output directory (default: out)")

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("spec")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")
    p.add_argument("-o", "--output", default="out", help="output directory (default: out)")

    p = sub.add_parser("calibrate", help="fit the dynamic cost table")
    p.add_argument("targets")
    p.add_argument("--config", help="platform config (overrides the targets file)")
    p.add_argument("-o", "--output", default="out", help="output directory (default: out)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    return SimulatorCli().dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
