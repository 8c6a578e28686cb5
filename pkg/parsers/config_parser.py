#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
平台配置解析器

负责把 JSON 配置文件解析成 PlatformConfig，以及把配置序列化回 JSON。
未知字段会被拒绝；结构不变量由 config.validate 另行检查。
"""

import json
from pathlib import Path
from typing import Union

from config.platform_config import PlatformConfig
from utils.json_loader import load_json_file, load_json_text, validate_model


class ConfigParser:
    """平台配置解析器"""

    @staticmethod
    def parse(text: str, source: str = "<string>") -> PlatformConfig:
        """
        解析配置文本

        Args:
            text: JSON 文本
            source: 文件名（用于诊断信息）

        Returns:
            PlatformConfig: 冻结的配置对象

        Raises:
            FileFormatError: JSON 语法错误（带行号）或字段错误（带字段路径）
        """
        return validate_model(PlatformConfig, load_json_text(text, source), source)

    @staticmethod
    def parse_file(path: Union[str, Path]) -> PlatformConfig:
        return validate_model(PlatformConfig, load_json_file(path), str(path))

    @staticmethod
    def serialize(config: PlatformConfig) -> str:
        """
        序列化为有序、缩进的 JSON

        派生字段（xif_available）不写出；外设按枚举顺序列出。
        """
        return json.dumps(config.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"
