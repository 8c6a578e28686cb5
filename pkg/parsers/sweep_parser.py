#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
参数扫描文件解析器

扫描文件指定一个场景、其中一个 run-benchmark 指令名、
指令内的点分参数路径（例如 policy.threshold）和取值列表。
"""

import copy
from pathlib import Path
from typing import Any, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from parsers.scenario_parser import RunBenchmark, Scenario, ScenarioParser
from sim.errors import FileFormatError
from utils.json_loader import load_json_file, validate_model


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    scenario: str
    run: str
    parameter: str
    values: List[Any] = Field(min_length=1)
    baseline: Optional[str] = None


def _set_path(data: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        child = node.get(key)
        if not isinstance(child, dict):
            raise KeyError(dotted)
        node = child
    if keys[-1] not in node:
        raise KeyError(dotted)
    node[keys[-1]] = value


class SweepParser:
    """扫描文件解析器"""

    @staticmethod
    def parse_file(path: Union[str, Path]) -> SweepSpec:
        path = Path(path)
        spec = validate_model(SweepSpec, load_json_file(path), str(path))
        scenario = Path(spec.scenario)
        if not scenario.is_absolute():
            spec = spec.model_copy(update={"scenario": str(path.parent / scenario)})
        return spec

    @staticmethod
    def load_scenario(spec: SweepSpec) -> Scenario:
        scenario = ScenarioParser.parse_file(spec.scenario)
        for name in filter(None, (spec.run, spec.baseline)):
            try:
                scenario.benchmark(name)
            except KeyError:
                raise FileFormatError(f"scenario has no run named {name!r}", source=spec.scenario) from None
        return scenario

    @staticmethod
    def points(spec: SweepSpec, scenario: Scenario) -> List[RunBenchmark]:
        """
        为每个取值生成一个 run-benchmark 指令，顺序与 values 相同

        Raises:
            FileFormatError: 参数路径不存在，或取值不合法
        """
        base = scenario.benchmark(spec.run).model_dump(mode="json")
        points = []
        for i, value in enumerate(spec.values):
            data = copy.deepcopy(base)
            try:
                _set_path(data, spec.parameter, value)
            except KeyError:
                raise FileFormatError("unknown sweep parameter", source=spec.scenario, field=spec.parameter) from None
            data["name"] = f"{spec.run}[{spec.parameter}={value}]"
            points.append(validate_model(RunBenchmark, data, f"{spec.name}:values.{i}"))
        return points
