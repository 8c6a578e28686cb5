#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
事件轨迹

引擎每投递一个事件写一行 cycle,component,payload。
"""

import csv
from pathlib import Path
from typing import IO, Optional, Union

TRACE_HEADER = ("cycle", "component", "payload")


class TraceWriter:
    """CSV 事件轨迹写入器，可以写到文件或任意文本流"""

    def __init__(self, stream: IO[str]):
        self._stream = stream
        self._writer = csv.writer(stream, lineterminator="\n")
        self._writer.writerow(TRACE_HEADER)
        self.rows = 0
        self._owned: Optional[IO[str]] = None

    @classmethod
    def open(cls, path: Union[str, Path]) -> "TraceWriter":
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        stream = path.open("w", encoding="utf-8", newline="")
        writer = cls(stream)
        writer._owned = stream
        return writer

    def write(self, cycle: int, component: str, payload: str) -> None:
        self._writer.writerow((cycle, component, payload))
        self.rows += 1

    def close(self) -> None:
        if self._owned is not None:
            self._owned.close()
            self._owned = None

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
