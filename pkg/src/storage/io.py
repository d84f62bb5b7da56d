import os
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar

import pandas as pd
from pydantic import BaseModel, ValidationError

from .schemas import RunMetadata
from ..config.settings import settings
from ..errors import InputError

T = TypeVar('T', bound=BaseModel)


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump()
    return value


class DataIO:

    @staticmethod
    def ensure_dir(path: str) -> None:
        if path:
            Path(path).mkdir(parents=True, exist_ok=True)

    @staticmethod
    def dumps(data: Any) -> str:
        """Deterministic JSON: sorted keys, indent 2, trailing newline."""
        return json.dumps(_jsonable(data), indent=2, sort_keys=True, default=str) + "\n"

    @staticmethod
    def save_json(data: Any, filepath: str) -> None:
        DataIO.ensure_dir(os.path.dirname(filepath))
        with open(filepath, 'w', encoding='utf-8') as f:
            f.write(DataIO.dumps(data))

    @staticmethod
    def load_json(filepath: str) -> Any:
        if not os.path.exists(filepath):
            raise InputError(f"file not found: {filepath}")

        with open(filepath, 'r', encoding='utf-8') as f:
            try:
                return json.load(f)
            except json.JSONDecodeError as e:
                raise InputError(f"{filepath} is not valid JSON: {e}")

    @staticmethod
    def load_model(filepath: str, model_class: Type[T]) -> T:
        data = DataIO.load_json(filepath)
        try:
            return model_class(**data)
        except (TypeError, ValidationError) as e:
            raise InputError(f"{filepath} does not parse as {model_class.__name__}: {e}")

    @staticmethod
    def summary_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
        """One row per record, columns in sorted order."""
        df = pd.DataFrame(rows)
        if df.empty:
            return df
        return df[sorted(df.columns)]

    @staticmethod
    def to_csv(rows: List[Dict[str, Any]]) -> str:
        return DataIO.summary_frame(rows).to_csv(index=False, lineterminator="\n")

    @staticmethod
    def save_csv(rows: List[Dict[str, Any]], filepath: str) -> None:
        DataIO.ensure_dir(os.path.dirname(filepath))
        DataIO.summary_frame(rows).to_csv(filepath, index=False, lineterminator="\n")

    @staticmethod
    def save_metadata(metadata: RunMetadata, out: str) -> str:
        """Run metadata goes next to the report, never inside it."""
        filepath = DataPaths.metadata_sidecar(out)
        DataIO.save_json(metadata.model_dump(), filepath)
        return filepath


class DataPaths:

    @staticmethod
    def metadata_sidecar(out: str) -> str:
        return f"{out}.meta.json"

    @staticmethod
    def sweep_report(catalog_hash: str, date_str: Optional[str] = None) -> str:
        if not date_str:
            date_str = datetime.now().strftime('%Y%m%d')
        filename = f"sweep_{catalog_hash[:12]}_{date_str}.json"
        return os.path.join(settings.DATA_REPORTS_PATH, filename)

    @staticmethod
    def estimate_report(modulus: int, bound: int) -> str:
        filename = f"cyclo_{modulus}_{bound}.json"
        return os.path.join(settings.DATA_REPORTS_PATH, filename)
