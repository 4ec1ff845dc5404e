"""
Run Store: persists every command's outputs (CSV tables, JSON records)
under a deterministic run id derived from the canonical run config.
"""

import hashlib
import json
import math
import shutil
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from config.settings import settings

CSV_FLOAT_FORMAT = "%.17g"


def _clean(value: Any) -> Any:
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return _clean(value.item())
    return value


def canonical_json(record: Any) -> str:
    return json.dumps(_clean(record), sort_keys=True, indent=2, allow_nan=False) + "\n"


class RunStore:
    """File-based store; a command's files land in the output dir only if it succeeds."""

    def __init__(self, output_dir: Optional[Path] = None):
        self.output_dir = Path(output_dir) if output_dir else settings.OUTPUT_DIR
        self._staging: Optional[Path] = None
        self._files: List[str] = []

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------
    @staticmethod
    def run_id(config_record: Dict[str, Any], command: str) -> str:
        digest = hashlib.sha256(f"{command}\n{canonical_json(config_record)}".encode()).hexdigest()[:12]
        return f"{command}_{digest}"

    def _target(self, name: str) -> Path:
        if self._staging is None:
            raise RuntimeError("RunStore.begin() must be called before writing")
        self._files.append(name)
        return self._staging / name

    # ------------------------------------------------------------------
    # Staged writes
    # ------------------------------------------------------------------
    def begin(self) -> None:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self._staging = Path(tempfile.mkdtemp(prefix=".staging_", dir=self.output_dir))
        self._files = []

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        path = self._target(name)
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return path

    def write_json(self, name: str, record: Any) -> Path:
        path = self._target(name)
        with path.open("w", encoding="utf-8", newline="\n") as f:
            f.write(canonical_json(record))
        return path

    def commit(self, run_id: str, command: str) -> List[Path]:
        """Move staged files into place and record them in manifest.json."""
        if self._staging is None:
            raise RuntimeError("nothing staged")
        moved = []
        for name in self._files:
            dest = self.output_dir / name
            shutil.move(str(self._staging / name), dest)
            moved.append(dest)
        shutil.rmtree(self._staging, ignore_errors=True)
        self._staging = None

        manifest = self.get_manifest()
        manifest[command] = {"run_id": run_id, "files": sorted(self._files)}
        with (self.output_dir / "manifest.json").open("w", encoding="utf-8", newline="\n") as f:
            f.write(canonical_json(manifest))
        return moved

    def abort(self) -> None:
        if self._staging is not None:
            shutil.rmtree(self._staging, ignore_errors=True)
        self._staging = None
        self._files = []

    def get_manifest(self) -> Dict[str, Any]:
        path = self.output_dir / "manifest.json"
        if not path.exists():
            return {}
        try:
            with path.open("r", encoding="utf-8") as f:
                return json.load(f)
        except (json.JSONDecodeError, OSError):
            return {}
