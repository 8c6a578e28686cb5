#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
熵策略的置信度来源

- fixed: 每个样本都是同一个分布
- dirichlet: 按种子从 Dirichlet(alpha) 抽样
- trace: 从 JSON 文件读取分布列表（按顺序循环使用）
"""

from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from utils.json_loader import load_json_file
from sim.errors import FileFormatError


class _Source(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FixedConfidence(_Source):
    kind: Literal["fixed"] = "fixed"
    probs: List[float] = Field(min_length=2)

    def sample(self, n: int, seed: int = 0) -> np.ndarray:
        return np.tile(np.asarray(self.probs, dtype=float), (n, 1))


class DirichletConfidence(_Source):
    """alpha 越小，分布越尖锐（熵越低）"""

    kind: Literal["dirichlet"] = "dirichlet"
    classes: int = Field(10, ge=2)
    alpha: float = Field(0.3, gt=0)

    def sample(self, n: int, seed: int = 0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        draws = rng.dirichlet(np.full(self.classes, self.alpha), size=n)
        # 抽样结果的行和可能偏离1一个舍入误差
        return draws / draws.sum(axis=1, keepdims=True)


class TraceConfidence(_Source):
    kind: Literal["trace"] = "trace"
    file: str

    def rows(self) -> np.ndarray:
        data = load_json_file(Path(self.file))
        if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
            raise FileFormatError("confidence trace must be a non-empty list of distributions", source=self.file)
        try:
            return np.asarray(data, dtype=float)
        except ValueError:
            raise FileFormatError("confidence trace rows must have equal length", source=self.file) from None

    def sample(self, n: int, seed: int = 0) -> np.ndarray:
        rows = self.rows()
        return rows[np.arange(n) % len(rows)]


ConfidenceSource = Annotated[
    Union[FixedConfidence, DirichletConfidence, TraceConfidence],
    Field(discriminator="kind"),
]


def describe_source(source: Optional[ConfidenceSource]) -> str:
    if source is None:
        return "-"
    if isinstance(source, FixedConfidence):
        return f"fixed({','.join(f'{p:g}' for p in source.probs)})"
    if isinstance(source, DirichletConfidence):
        return f"dirichlet(K={source.classes}, alpha={source.alpha:g})"
    return f"trace({source.file})"
