"""
Writers for reports (JSON) and bulk data (CSV).

Nothing written here carries a timestamp, so re-running a subcommand with the
same config and seed reproduces byte-identical files.
"""
import csv
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np # type: ignore
import orjson # type: ignore
from pydantic import BaseModel # type: ignore

from models.params import Trajectory
from models.reports import DiagnosticSeries, Histogram, HittingTimeStats
from models.run_config import RunConfig

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def _default(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json", by_alias=True)
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    raise TypeError(f"Type {type(value).__name__} is not JSON serializable")


def render_json(content: Any) -> bytes:
    """Serializes reports with orjson; pydantic models are dumped by alias."""
    return orjson.dumps(content, default=_default, option=JSON_OPTIONS) + b"\n"


def fmt(value: Optional[float]) -> str:
    return "" if value is None else format(float(value), ".17g")


class RunOutputs:
    """
    Collects the files of one run under a single output directory.

    The directory is created on the first write, so a run that fails before
    producing anything leaves no trace on disk.
    """

    def __init__(self, out_dir: Path, config: RunConfig):
        self.out_dir = Path(out_dir)
        self.config = config
        self.files: List[str] = []

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        self.files.append(str(path))
        return path

    def report(self, name: str, command: str, result: Any, passed: Optional[bool] = None) -> Path:
        """Writes a JSON report embedding the resolved config."""
        document: Dict[str, Any] = {
            "command": command,
            "config": self.config.model_dump(mode="json"),
            "result": result,
        }
        if passed is not None:
            document["pass"] = passed
        path = self._path(name)
        path.write_bytes(render_json(document))
        return path

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self._path(name)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) or v is None else v for v in row])
        return path


def write_trajectory_csv(outputs: RunOutputs, name: str, traj: Trajectory) -> Path:
    rows = ((float(t), *map(float, s)) for t, s in zip(traj.times, traj.states))
    return outputs.csv(name, ("t", "x", "y", "z"), rows)


def write_hitting_csv(outputs: RunOutputs, name: str, stats: HittingTimeStats) -> Path:
    rows = ((i, int(t is not None), t) for i, t in enumerate(stats.first_entry))
    return outputs.csv(name, ("traj_id", "hit", "hit_time"), rows)


def write_histogram_csv(outputs: RunOutputs, name: str, histogram: Histogram) -> Path:
    edges = histogram.edges
    rows = ((float(lo), float(hi), int(c)) for lo, hi, c in zip(edges[:-1], edges[1:], histogram.counts))
    return outputs.csv(name, ("bin_lo", "bin_hi", "count"), rows)


def write_diagnostic_csvs(outputs: RunOutputs, series: DiagnosticSeries) -> List[Path]:
    return [
        outputs.csv("diagnostic.csv", ("t", "mean_M", "stderr"), zip(series.t, series.mean_M, series.stderr)),
        outputs.csv(
            "diagnostic_moments.csv", ("t", "mean_x2", "mean_z2"),
            zip(series.t, series.mean_x2, series.mean_z2),
        ),
    ]
