"""Report writers. Every file is written to a temporary sibling and renamed."""

from __future__ import annotations

from contextlib import contextmanager
import json
import math
import os
from pathlib import Path
import tempfile
from typing import Any, Iterator, List, Mapping, Sequence

import pandas as pd

FLOAT_FORMAT = "%.17g"


@contextmanager
def atomic_path(path: Path) -> Iterator[Path]:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    os.close(handle)
    temp = Path(name)
    try:
        yield temp
        os.replace(temp, path)
    except BaseException:
        temp.unlink(missing_ok=True)
        raise


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, Mapping):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, Path):
        return str(value)
    return value


def render_json(payload: Any) -> str:
    return json.dumps(_jsonable(payload), indent=2, ensure_ascii=False) + "\n"


def write_json(path: Path, payload: Any) -> Path:
    with atomic_path(path) as temp:
        temp.write_text(render_json(payload), encoding="utf-8", newline="\n")
    return Path(path)


def write_csv(path: Path, rows: Sequence[Mapping[str, Any]], columns: List[str]) -> Path:
    frame = pd.DataFrame(list(rows), columns=columns)
    with atomic_path(path) as temp:
        frame.to_csv(temp, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    return Path(path)


def write_column(path: Path, name: str, values: Sequence[float]) -> Path:
    return write_csv(path, [{name: float(v)} for v in values], [name])
