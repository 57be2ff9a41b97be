"""
Accuracy / throughput / energy-efficiency / area accounting per configuration,
plus the CSV and JSON serialization of experiment reports.
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Sequence, Tuple

import numpy as np
import numpy.typing as npt
import pandas as pd

from src import preprocess
from src.entities.device import DeviceParams
from src.entities.experiment_report import ExperimentReport
from src.entities.preprocess_spec import PreprocessSpec

TradeOffMetric = Literal["images_per_second", "images_per_joule", "device_count"]

REPORT_COLUMNS: List[str] = list(ExperimentReport.model_fields)

# lower is better for area, higher for every other trade-off metric
_LOWER_IS_BETTER = {"device_count"}

_logger = logging.getLogger(__name__)

def throughput(spec: PreprocessSpec, image_shape: Tuple[int, int], params: DeviceParams) -> float:
    """
    Images per second: one image takes (longest train + 1 read slot) pulse widths.
    """
    wall_time = (preprocess.slot_count(spec, *image_shape) + 1) * params.t_pulse
    return 1.0 / wall_time

def energy_efficiency(total_energy: float, image_count: int) -> float:
    """
    Images per joule of reservoir (write + read) energy.
    """
    if total_energy <= 0.0:
        raise ValueError(f"Energy efficiency needs a positive total energy, got {total_energy}")
    return image_count / total_energy

def area(spec: PreprocessSpec, image_shape: Tuple[int, int]) -> int:
    """
    Relative area, approximated by the number of reservoir memristors.
    """
    return preprocess.reservoir_size(spec, *image_shape)

def readout_weight_count(device_count: int, classes: int = 10) -> int:
    return device_count * classes

def mlp_parameter_count(n: int, m: int, hidden: Sequence[int] = (20, 20), classes: int = 10) -> int:
    """
    Trainable weights of a dense network on the flattened image, for comparison
    with the readout-only training of the reservoir.
    """
    widths = [n * m, *hidden, classes]
    return sum(a * b for a, b in zip(widths, widths[1:]))

def r_squared(x: npt.ArrayLike, y: npt.ArrayLike) -> float:
    """
    Coefficient of determination of a least-squares line through (x, y).
    """
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = np.sum((ys - (slope * xs + intercept)) ** 2)
    total = np.sum((ys - ys.mean()) ** 2)
    return 1.0 - residual / total if total > 0 else 1.0

def pareto_front(reports: Sequence[ExperimentReport], metric: TradeOffMetric) -> List[ExperimentReport]:
    """
    Configurations for which no other configuration is at least as good in
    both accuracy and `metric` and strictly better in one of them.
    """
    sign = -1.0 if metric in _LOWER_IS_BETTER else 1.0

    def score(report: ExperimentReport) -> Tuple[float, float]:
        return report.accuracy, sign * float(getattr(report, metric))

    front = []
    for candidate in reports:
        a, b = score(candidate)
        dominated = any(
            (oa >= a and ob >= b) and (oa > a or ob > b)
            for oa, ob in (score(other) for other in reports)
        )
        if not dominated:
            front.append(candidate)
    return sorted(front, key=lambda r: -r.accuracy)

def reports_frame(reports: Sequence[ExperimentReport]) -> pd.DataFrame:
    return pd.DataFrame([report.as_dict() for report in reports], columns=REPORT_COLUMNS)

def write_reports(reports: Sequence[ExperimentReport], out_dir: Path) -> Tuple[Path, Path]:
    """
    Writes reports.csv (one row per configuration) and reports.json.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "reports.csv"
    json_path = out_dir / "reports.json"

    reports_frame(reports).to_csv(csv_path, index=False, float_format="%.10g", lineterminator="\n")
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump([report.as_dict() for report in reports], f, indent=2)
        f.write("\n")

    _logger.info(f"Wrote {len(reports)} reports to {csv_path} and {json_path}")
    return csv_path, json_path

def read_reports(csv_path: Path) -> List[ExperimentReport]:
    frame = pd.read_csv(csv_path)
    return [ExperimentReport.model_validate(row) for row in frame.to_dict(orient="records")]

def summarize_energy(reports: Sequence[ExperimentReport]) -> Dict[str, float]:
    fractions = [report.write_energy_fraction for report in reports]
    return {
        "min_write_energy_fraction": float(min(fractions)),
        "max_write_energy_fraction": float(max(fractions)),
    }
