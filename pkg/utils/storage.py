"""
Storage Manager
Writes result tables (CSV) and structured reports (JSON) to files or stdout
"""

import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

SCHEMA_VERSION = 1
FLOAT_FORMAT = '%.10g'


def _plain(value: Any):
    """JSON fallback for numpy scalars, arrays and NaN"""
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return None if math.isnan(value) else float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Cannot serialise {type(value).__name__}")


def _scrub(value: Any):
    # json emits NaN as a bare token; reports use null instead
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, dict):
        return {str(k): _scrub(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_scrub(v) for v in value]
    return value


class StorageManager:
    """
    Report output for the CLI

    Args:
        out: File path, or '-' / None for stdout
    """

    def __init__(self, out: Optional[str] = None):
        self.out = out

    def _write(self, text: str, out: Optional[str] = None):
        target = out if out is not None else self.out
        if target in (None, '-'):
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as f:
            f.write(text)

    @staticmethod
    def csv_text(frame: pd.DataFrame, schema: str) -> str:
        buffer = io.StringIO()
        buffer.write(f"# schema: {schema} v{SCHEMA_VERSION}\n")
        frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        return buffer.getvalue()

    @staticmethod
    def json_text(data: Any) -> str:
        return json.dumps(_scrub(data), indent=2, sort_keys=True, default=_plain) + "\n"

    def save_table(self, frame: pd.DataFrame, schema: str, out: Optional[str] = None):
        """Write a table as CSV with a leading '# schema: <name> v1' line"""
        self._write(self.csv_text(frame, schema), out)

    def save_report(self, data: Any, out: Optional[str] = None):
        """Write a structured report as sorted-key JSON"""
        self._write(self.json_text(data), out)

    def save(self, frame: pd.DataFrame, schema: str, fmt: str = 'csv', extra: Optional[dict] = None,
             out: Optional[str] = None):
        """
        Write a result in the requested format

        Args:
            frame: Result table
            schema: Schema name for the CSV header / JSON 'schema' key
            fmt: 'csv' or 'structured'
            extra: Additional keys for the structured report
            out: Override the output target
        """
        if fmt == 'csv':
            self.save_table(frame, schema, out)
            return
        report = {'schema': f"{schema} v{SCHEMA_VERSION}",
                  'rows': json.loads(frame.to_json(orient='records', double_precision=15))}
        report.update(extra or {})
        self.save_report(report, out)

    @staticmethod
    def load_table(path) -> pd.DataFrame:
        return pd.read_csv(path, skiprows=1)
