#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
场景文件解析器

场景 = 平台配置 + 按序执行的指令列表。硬件指令（计算、读写、电源、DMA、卸载、
等待中断、加载/转储存储体、定时器、外部中断）组成平台程序；run-benchmark
指令各自在独立的平台实例上运行提前退出基准。

场景里的相对路径（配置、模型、代价表、加载文件、轨迹文件）相对于场景文件所在目录解析；
转储文件相对于输出目录，由场景处理器解析。
"""

from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from config.platform_config import Peripheral, PlatformConfig, ValidationReport
from energy.models import DynamicCostTable
from hw.cpu import (
    ArmTimer,
    Compute,
    DumpImage,
    LoadImage,
    Offload,
    PowerCommand,
    RaiseExternal,
    Read,
    StartDma,
    WaitForInterrupt,
    Write,
)
from parsers.config_parser import ConfigParser
from utils.json_loader import load_json_file, validate_model
from workload.benchmark import BenchmarkMode
from workload.confidence import TraceConfidence
from workload.model_spec import ExitMode, ExitPolicy, LayerMapping, ModelSpec, load_model_fixture


class RunBenchmark(BaseModel):
    """
    一次提前退出基准运行

    model 可以是随仓库发布的模型名（transformer-ee）、相对路径（*.json）或内联模型。
    policy 没写 seed 时使用场景的 seed。
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    op: Literal["run-benchmark"] = "run-benchmark"
    name: str
    model: Union[str, ModelSpec]
    policy: ExitPolicy
    mapping: LayerMapping = LayerMapping.CPU
    samples: int = Field(10_000, ge=1)
    mode: BenchmarkMode = BenchmarkMode.EXPECTED
    shards: int = Field(1, ge=1)
    slot: int = 0


ScenarioDirective = Annotated[
    Union[
        Compute,
        Read,
        Write,
        PowerCommand,
        StartDma,
        Offload,
        WaitForInterrupt,
        LoadImage,
        DumpImage,
        ArmTimer,
        RaiseExternal,
        RunBenchmark,
    ],
    Field(discriminator="op"),
]


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    # 缺省使用默认平台配置
    config: Optional[str] = None
    costs: Optional[str] = None
    seed: int = 0
    baseline: Optional[str] = None
    directives: List[ScenarioDirective] = []

    @property
    def program(self) -> list:
        """平台程序：除 run-benchmark 以外的全部指令，保持原顺序"""
        return [d for d in self.directives if not isinstance(d, RunBenchmark)]

    @property
    def benchmarks(self) -> List[RunBenchmark]:
        return [d for d in self.directives if isinstance(d, RunBenchmark)]

    def benchmark(self, name: str) -> RunBenchmark:
        for run in self.benchmarks:
            if run.name == name:
                return run
        raise KeyError(name)


def _resolve(base: Path, value: str) -> str:
    path = Path(value)
    return str(path if path.is_absolute() else base / path)


def _resolve_policy(base: Path, policy: ExitPolicy, seed: int) -> ExitPolicy:
    update = {}
    if "seed" not in policy.model_fields_set:
        update["seed"] = seed
    if policy.mode is ExitMode.TRACE:
        update["trace_file"] = _resolve(base, policy.trace_file)
    if isinstance(policy.confidence, TraceConfidence):
        update["confidence"] = policy.confidence.model_copy(update={"file": _resolve(base, policy.confidence.file)})
    return policy.model_copy(update=update) if update else policy


class ScenarioParser:
    """场景文件解析器"""

    @staticmethod
    def parse_file(path: Union[str, Path]) -> Scenario:
        """
        解析场景文件并把相对路径换成以场景目录为基准的路径

        Raises:
            FileFormatError: JSON 语法错误或字段错误
        """
        path = Path(path)
        scenario = validate_model(Scenario, load_json_file(path), str(path))
        return ScenarioParser.resolve_paths(scenario, path.parent)

    @staticmethod
    def resolve_paths(scenario: Scenario, base: Path) -> Scenario:
        directives = []
        for d in scenario.directives:
            if isinstance(d, LoadImage):
                d = d.model_copy(update={"file": _resolve(base, d.file)})
            elif isinstance(d, RunBenchmark):
                update = {"policy": _resolve_policy(base, d.policy, scenario.seed)}
                if isinstance(d.model, str) and d.model.endswith(".json"):
                    update["model"] = _resolve(base, d.model)
                d = d.model_copy(update=update)
            directives.append(d)
        update = {"directives": directives}
        if scenario.config:
            update["config"] = _resolve(base, scenario.config)
        if scenario.costs:
            update["costs"] = _resolve(base, scenario.costs)
        return scenario.model_copy(update=update)

    @staticmethod
    def load_config(scenario: Scenario) -> PlatformConfig:
        if scenario.config is None:
            return PlatformConfig()
        return ConfigParser.parse_file(scenario.config)

    @staticmethod
    def load_costs(scenario: Scenario) -> DynamicCostTable:
        if scenario.costs is None:
            return DynamicCostTable()
        return validate_model(DynamicCostTable, load_json_file(scenario.costs), scenario.costs)

    @staticmethod
    def load_model(run: RunBenchmark) -> ModelSpec:
        if isinstance(run.model, ModelSpec):
            return run.model
        if run.model.endswith(".json"):
            return validate_model(ModelSpec, load_json_file(run.model), run.model)
        return load_model_fixture(run.model)

    @staticmethod
    def check(scenario: Scenario, config: PlatformConfig) -> ValidationReport:
        """
        检查指令只引用配置里存在的实体

        违规作为数据返回，字段路径形如 directives.3.slot。
        """
        report = ValidationReport()
        domains = {"cpu", "peripheral", "ao", "bus", "debug"}
        domains.update(f"bank{i}" for i in range(config.bank_count))
        domains.update(f"accel{s}" for s in range(config.accelerator_slots))
        populated = {entry.slot for entry in config.accelerators}
        names = set()

        for i, d in enumerate(scenario.directives):
            prefix = f"directives.{i}"
            if isinstance(d, PowerCommand) and d.domain not in domains:
                report.add(f"{prefix}.domain", f"unknown power domain {d.domain!r}")
            elif isinstance(d, (LoadImage, DumpImage)) and not 0 <= d.bank < config.bank_count:
                report.add(f"{prefix}.bank", f"bank {d.bank} does not exist")
            elif isinstance(d, StartDma) and not 0 <= d.descriptor.channel < config.dma_channel_count:
                report.add(f"{prefix}.descriptor.channel", f"dma channel {d.descriptor.channel} does not exist")
            elif isinstance(d, Offload) and d.slot not in populated:
                report.add(f"{prefix}.slot", f"no accelerator in slot {d.slot}")
            elif isinstance(d, ArmTimer) and Peripheral.TIMER not in config.peripherals:
                report.add(f"{prefix}.op", "timer directive needs the Timer peripheral")
            elif isinstance(d, RunBenchmark):
                if d.name in names:
                    report.add(f"{prefix}.name", f"duplicate run name {d.name!r}")
                names.add(d.name)
                if d.mapping is LayerMapping.ACCEL and d.slot not in populated:
                    report.add(f"{prefix}.slot", f"accel mapping needs an accelerator in slot {d.slot}")

        if scenario.baseline is not None and scenario.baseline not in names:
            report.add("baseline", f"no run named {scenario.baseline!r}")
        return report
