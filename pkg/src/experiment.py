"""
Experiment pipeline: binarize -> expand -> sectionize -> drive the reservoir ->
read -> quantize/rescale -> train the readout -> evaluate -> report.

Read currents are simulated once per sweep job (one preprocessing spec and
some of its bit widths) and reused for each of those bit widths and every
epoch: the reservoir is never trained, so an image's features never change.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from src import metrics, readout, reservoir
from src.dataset import CLASS_COUNT, DatasetError, LabeledImageSet, dataset_cache, subset
from src.entities.experiment_config import ConfigError, ExperimentConfig
from src.entities.experiment_report import ExperimentReport
from src.entities.preprocess_spec import Dimension, PreprocessSpec
from src.utils.config import settings
from src.worker import run_jobs

PLOT_COLUMNS: List[str] = [
    "method", "sections", "bits", "accuracy", "images_per_second", "images_per_joule", "device_count"
]
PLOT_TABLES: Dict[str, str] = {
    "accuracy_vs_throughput.csv": "images_per_second",
    "accuracy_vs_efficiency.csv": "images_per_joule",
    "accuracy_vs_area.csv": "device_count",
}

_logger = logging.getLogger(__name__)

class SweepJob(BaseModel):
    """
    All grid points sharing one preprocessing spec.
    """
    model_config = ConfigDict(frozen=True)

    config: ExperimentConfig
    spec: PreprocessSpec
    bits: Tuple[int, ...]

class PointResult:
    def __init__(self, report: ExperimentReport, model: readout.ReadoutModel, losses: List[float]):
        self.report = report
        self.model = model
        self.losses = losses

def load_datasets(config: ExperimentConfig) -> Tuple[LabeledImageSet, LabeledImageSet]:
    paths = config.dataset
    train_set = dataset_cache.load(paths.train_images, paths.train_labels)
    test_set = dataset_cache.load(paths.test_images, paths.test_labels)

    if train_set.image_shape != test_set.image_shape:
        raise DatasetError(f"Train images are {train_set.image_shape} but test images are {test_set.image_shape}")

    if paths.train_subset is not None and paths.train_subset != train_set.count:
        train_set = subset(train_set, paths.train_subset, seed=config.seed)
    if paths.test_subset is not None and paths.test_subset != test_set.count:
        test_set = subset(test_set, paths.test_subset, seed=config.seed + 1)

    return train_set, test_set

def run_job(job: SweepJob) -> List[PointResult]:
    """
    Simulates the reservoir once for `job.spec`, then trains and evaluates one
    readout per bit width.
    """
    config = job.config
    spec = job.spec
    params = config.device
    cfg = config.train_config()

    train_set, test_set = load_datasets(config)
    image_shape = train_set.image_shape
    _logger.info(f"Extracting features for {spec} on {train_set.count} train / {test_set.count} test images")

    train_response = reservoir.simulate_images(train_set.images, spec, params, settings.FEATURE_CHUNK_SIZE)
    test_response = reservoir.simulate_images(test_set.images, spec, params, settings.FEATURE_CHUNK_SIZE)

    # global scaling is calibrated on the training currents only
    bounds = train_response.current_bounds() if config.quantization.scaling == "global" else None

    # energy is accounted on the inference (test) images
    device_count = metrics.area(spec, image_shape)
    images_per_second = metrics.throughput(spec, image_shape, params)
    images_per_joule = metrics.energy_efficiency(test_response.total_energy, test_response.image_count)
    weights = metrics.readout_weight_count(device_count, CLASS_COUNT)

    results = []
    for bits in job.bits:
        x_train = reservoir.rescale(train_response.currents, bits, bounds)
        x_test = reservoir.rescale(test_response.currents, bits, bounds)

        model = readout.init(device_count, CLASS_COUNT, seed=cfg.seed, bias=cfg.bias)
        model, losses = readout.train(model, x_train, train_set.labels, cfg)

        report = ExperimentReport(
            method=spec.method,
            dimension=spec.dimension,
            parity=spec.parity,
            sections=spec.sections,
            threshold=spec.threshold,
            bits=bits,
            scaling=config.quantization.scaling,
            accuracy=readout.evaluate(model, x_test, test_set.labels),
            train_accuracy=readout.evaluate(model, x_train, train_set.labels),
            images_per_second=images_per_second,
            images_per_joule=images_per_joule,
            energy_per_image=test_response.total_energy / test_response.image_count,
            write_energy_fraction=test_response.total_write_energy / test_response.total_energy,
            device_count=device_count,
            readout_weights=weights,
            total_memristors=device_count + weights,
            epochs=cfg.epochs,
            learning_rate=cfg.learning_rate,
            seed=cfg.seed,
            train_count=train_set.count,
            test_count=test_set.count
        )
        _logger.info(f"{spec} bits={bits}: accuracy {report.accuracy:.4f}")
        results.append(PointResult(report, model, losses))

    return results

def _jobs(config: ExperimentConfig) -> List[SweepJob]:
    """
    One job per preprocessing spec. With more workers than specs, each spec's
    bit widths are split into contiguous chunks so that the spare workers are
    used; every chunk simulates its spec's features again. Jobs are in grid order.
    """
    specs = config.preprocess.specs()
    bits = config.quantization.bits
    parts = max(1, min(len(bits), config.workers // len(specs)))
    return [
        SweepJob(config=config, spec=spec, bits=tuple(int(b) for b in chunk))
        for spec in specs
        for chunk in np.array_split(np.asarray(bits), parts)
    ]

def _weights_path(out_dir: Path, report: ExperimentReport) -> Path:
    method = report.method.replace("+", "-")
    return out_dir / "weights" / f"{method}_k{report.sections}_b{report.bits}.csv"

def _write_outputs(results: Sequence[PointResult], config: ExperimentConfig) -> List[ExperimentReport]:
    out_dir = config.output.directory
    reports = [result.report for result in results]

    metrics.write_reports(reports, out_dir)
    emit_plot_tables(reports, out_dir, config.output.omit_single_section_below)
    for result in results:
        readout.save_weights(result.model, _weights_path(out_dir, result.report))

    losses = pd.DataFrame({
        f"{result.report.method} k={result.report.sections} b={result.report.bits}": result.losses
        for result in results
    })
    losses.index.name = "epoch"
    losses.to_csv(out_dir / "loss_traces.csv", float_format="%.10g", lineterminator="\n")
    return reports

def run(config: ExperimentConfig) -> ExperimentReport:
    """
    Runs a config describing exactly one grid point and writes its outputs.
    """
    grid = config.grid()
    if len(grid) != 1:
        raise ConfigError(f"'run' needs a single configuration, the config describes {len(grid)}; use 'sweep'.")

    spec, bits = grid[0]
    results = run_job(SweepJob(config=config, spec=spec, bits=(bits,)))
    return _write_outputs(results, config)[0]

def sweep(config: ExperimentConfig) -> List[ExperimentReport]:
    """
    One report per grid point (grid order), plus the plot tables and summary.json.
    """
    jobs = _jobs(config)
    _logger.info(f"Sweeping {len(config.grid())} configurations in {len(jobs)} jobs on {config.workers} worker(s)")

    results = [result for job_results in run_jobs(jobs, run_job, config.workers) for result in job_results]
    reports = _write_outputs(results, config)

    summary_path = config.output.directory / "summary.json"
    with open(summary_path, "w", encoding="utf-8") as f:
        json.dump(sweep_summary(reports), f, indent=2)
        f.write("\n")
    _logger.info(f"Wrote sweep summary to {summary_path}")
    return reports

def emit_plot_tables(
        reports: Sequence[ExperimentReport],
        out_dir: Path,
        omit_single_section_below: Optional[float] = None
) -> List[Path]:
    """
    Writes accuracy_by_method.csv and the three accuracy-vs-metric scatter
    tables, all with PLOT_COLUMNS and sorted by accuracy (descending).
    """
    if len(reports) == 0:
        raise ValueError("At least one report is needed to emit plot tables.")

    out_dir.mkdir(parents=True, exist_ok=True)
    table = (
        metrics.reports_frame(reports)[PLOT_COLUMNS]
        .sort_values("accuracy", ascending=False, kind="stable")
        .reset_index(drop=True)
    )

    scatter = table
    if omit_single_section_below is not None:
        scatter = table[~((table["sections"] == 1) & (table["accuracy"] < omit_single_section_below))]

    paths = [out_dir / "accuracy_by_method.csv"]
    table.to_csv(paths[0], index=False, float_format="%.10g", lineterminator="\n")
    for name in PLOT_TABLES:
        path = out_dir / name
        scatter.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
        paths.append(path)

    _logger.info(f"Wrote {len(paths)} plot tables to {out_dir}")
    return paths

def _point(report: ExperimentReport) -> Dict[str, Any]:
    return {"method": report.method, "sections": report.sections, "bits": report.bits, "accuracy": report.accuracy}

def sweep_summary(reports: Sequence[ExperimentReport]) -> Dict[str, Any]:
    """
    Pairwise accuracy deltas (parity vs none, 2D vs 1D at otherwise equal
    settings), the best configuration and the trade-off frontiers.
    """
    by_key = {(r.dimension, r.parity, r.sections, r.bits): r for r in reports}

    parity_gain = []
    two_d_gain = []
    for (dimension, parity, sections, bits), report in by_key.items():
        if parity:
            base = by_key.get((dimension, False, sections, bits))
            if base is not None:
                parity_gain.append({
                    "dimension": str(dimension), "sections": sections, "bits": bits,
                    "without": base.accuracy, "with": report.accuracy, "delta": report.accuracy - base.accuracy
                })
        if dimension is Dimension.TWO_D:
            base = by_key.get((Dimension.ONE_D, parity, sections, bits))
            if base is not None:
                two_d_gain.append({
                    "parity": parity, "sections": sections, "bits": bits,
                    "one_d": base.accuracy, "two_d": report.accuracy, "delta": report.accuracy - base.accuracy
                })

    mean_parity_gain = {
        str(dimension): sum(g["delta"] for g in gains) / len(gains)
        for dimension in Dimension
        if (gains := [g for g in parity_gain if g["dimension"] == str(dimension)])
    }

    best = max(reports, key=lambda r: r.accuracy)
    return {
        "configurations": len(reports),
        "best": _point(best),
        "parity_gain": parity_gain,
        "mean_parity_gain": mean_parity_gain,
        "two_d_gain": two_d_gain,
        "pareto": {
            metric: [_point(r) | {metric: getattr(r, metric)} for r in metrics.pareto_front(reports, metric)]
            for metric in PLOT_TABLES.values()
        },
        "energy": metrics.summarize_energy(reports),
    }
