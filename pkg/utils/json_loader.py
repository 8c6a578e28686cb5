#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
JSON 文件读取

所有输入文件都经过这里，语法错误转换成带行号的 FileFormatError，
结构校验错误（pydantic ValidationError）转换成带字段路径的 FileFormatError。
"""

import json
from pathlib import Path
from typing import Any, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from sim.errors import FileFormatError

T = TypeVar("T", bound=BaseModel)


def load_json_text(text: str, source: str = "<string>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(e.msg, source=source, line=e.lineno) from None


def load_json_file(path: Union[str, Path]) -> Any:
    """
    读取并解析一个JSON文件

    Raises:
        FileFormatError: 文件不存在、无法解码或JSON语法错误
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileFormatError("file not found", source=str(path)) from None
    except (OSError, UnicodeDecodeError) as e:
        raise FileFormatError(f"cannot read file: {e}", source=str(path)) from None
    return load_json_text(text, source=str(path))


def _field_path(location) -> str:
    return ".".join(str(part) for part in location)


def validate_model(model: Type[T], data: Any, source: str = "<string>") -> T:
    """
    按模型校验数据，只报告第一个错误

    Raises:
        FileFormatError: field 为出错字段路径（例如 directives.2.descriptor.element_size）
    """
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise FileFormatError(first["msg"], source=source, field=_field_path(first["loc"]) or None) from None
