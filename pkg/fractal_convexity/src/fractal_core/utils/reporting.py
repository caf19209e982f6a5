import json
from pathlib import Path
from typing import Any, Iterable, List, Optional

import pandas as pd
import pydantic

from fractal_core.models import RegressionRow, SandwichReport, TheoremReport

SANDWICH_COLUMNS = ["u", "lower_value", "phi_value", "upper_value"]


def to_plain(obj: Any) -> Any:
    """pydantic models (and lists of them) to JSON-ready data, schema aliases applied"""
    if isinstance(obj, pydantic.BaseModel):
        return obj.model_dump(mode="json", by_alias=True)
    if isinstance(obj, (list, tuple)):
        return [to_plain(item) for item in obj]
    if isinstance(obj, dict):
        return {key: to_plain(value) for key, value in obj.items()}
    return obj


def to_json(obj: Any) -> str:
    """Key-sorted JSON, so identical runs produce identical bytes"""
    return json.dumps(to_plain(obj), sort_keys=True, indent=2)


def sandwich_frame(report: SandwichReport) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in report.rows])[SANDWICH_COLUMNS]


def regression_frame(rows: Iterable[RegressionRow]) -> pd.DataFrame:
    records = []
    for row in rows:
        record = {"family": row.family, **row.params}
        record.update(
            alpha=row.alpha,
            sense=row.sense.value,
            expected=row.expected.value,
            observed=row.observed.value,
            margin=row.margin,
            matches=row.matches,
        )
        records.append(record)
    return pd.DataFrame.from_records(records)


def to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False)


def traceability_table(reports: List[TheoremReport]) -> str:
    """theorem id, test id, status and citation, one line per check"""
    frame = pd.DataFrame(
        [
            {
                "theorem": report.theorem_id,
                "test": report.details.get("test_id", ""),
                "status": report.conclusion_status.value,
                "citation": report.citation,
            }
            for report in reports
        ],
        columns=["theorem", "test", "status", "citation"],
    )
    return frame.to_string(index=False)


def emit(text: str, out_path: Optional[str] = None) -> None:
    if out_path:
        Path(out_path).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)
