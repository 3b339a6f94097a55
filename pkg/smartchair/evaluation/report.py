"""
实验编排与报告输出

输出文件：report.json、auc_table.csv、roc_curve.csv、importance.csv、correlations.csv 与 SVG 图表
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from smartchair.config import ExperimentConfig
from smartchair.core.errors import ConfigError
from smartchair.evaluation import plots
from smartchair.evaluation.experiment import EvalReport, ExperimentReport, model_specs, run_experiment
from smartchair.evaluation.splits import make_splits
from smartchair.models.features import Dataset
from smartchair.models.sample import SessionWindow
from smartchair.services.feature_service import correlation_matrix

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
AUC_TABLE_FILE = "auc_table.csv"
ROC_FILE = "roc_curve.csv"
IMPORTANCE_FILE = "importance.csv"
CORRELATIONS_FILE = "correlations.csv"


def evaluate_dataset(dataset: Dataset, config: ExperimentConfig) -> ExperimentReport:
    """
    按配置评估全部模型

    Args:
        dataset: 特征数据集
        config: 实验配置

    Returns:
        实验报告
    """
    labels = dataset.player_labels()
    splits = make_splits(labels, config.n_repeats, config.holdout, config.seed)
    correlations = correlation_matrix(dataset)
    if config.shuffle_labels:
        logger.info(f"Null run: labels permuted between players inside each fold of every repeat")

    reports = [
        run_experiment(dataset, spec, splits, config.roc_repeat, config.per_player, config.workers, config.shuffle_labels)
        for spec in model_specs(config)
    ]

    counts = np.bincount(np.fromiter(labels.values(), dtype=np.int64), minlength=2)
    return ExperimentReport(
        settings={
            "models": list(config.models),
            "n_repeats": config.n_repeats,
            "holdout": list(config.holdout),
            "seed": config.seed,
            "per_player": config.per_player,
            "shuffle_labels": config.shuffle_labels,
            "threshold_g": config.threshold_g,
            "window_seconds": config.window_seconds,
            "completeness_fraction": config.completeness_fraction,
        },
        dataset={
            "n_windows": dataset.n_rows,
            "n_players": len(labels),
            "players_labeled_1": int(counts[1]),
            "players_labeled_0": int(counts[0]),
            "feature_names": list(dataset.feature_names),
        },
        models=reports,
        correlations=correlations,
    )


def render_auc_table(reports: Sequence[Union[EvalReport, Dict[str, Any]]]) -> str:
    """
    模型表现汇总表：模型、AUC 均值、AUC 标准差

    Args:
        reports: 评估报告或其 to_dict 输出

    Returns:
        对齐的文本表格
    """
    rows = []
    for report in reports:
        if isinstance(report, EvalReport):
            report = report.to_dict()
        rows.append((report["label"], f"{report['auc_mean']:.2f}", f"{report['auc_std']:.2f}"))

    header = ("Model", "AUC, mean", "AUC, std")
    widths = [max(len(row[i]) for row in rows + [header]) for i in range(3)]
    lines = [" | ".join(cell.ljust(width) for cell, width in zip(header, widths))]
    lines.append("-+-".join("-" * width for width in widths))
    for row in rows:
        lines.append(" | ".join(cell.ljust(width) for cell, width in zip(row, widths)))
    return "\n".join(lines)


def _auc_frame(models: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "model": m["model"],
                "label": m["label"],
                "auc_mean": m["auc_mean"],
                "auc_std": m["auc_std"],
                "accuracy_mean": m["accuracy_mean"],
                "n_repeats": len(m["aucs"]),
            }
            for m in models
        ]
    )


def _roc_frame(models: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    rows = [
        {"model": m["model"], "repeat": m["roc_repeat"], "fpr": fpr, "tpr": tpr}
        for m in models
        for fpr, tpr in m["roc"]
    ]
    return pd.DataFrame(rows, columns=["model", "repeat", "fpr", "tpr"])


def _importances(models: Sequence[Dict[str, Any]]) -> Optional[Dict[str, float]]:
    return next((m["importances"] for m in models if m.get("importances")), None)


def write_figures(
    doc: Dict[str, Any],
    output_dir: Path,
    correlations: Optional[pd.DataFrame] = None,
    window: Optional[SessionWindow] = None,
) -> List[Path]:
    """从报告文档绘制 SVG 图表"""
    models = list(doc["models"].values())
    paths = [
        plots.plot_roc(
            {m["label"]: [tuple(p) for p in m["roc"]] for m in models},
            output_dir / "roc.svg",
            aucs={m["label"]: m["auc_mean"] for m in models},
        )
    ]
    importances = _importances(models)
    if importances:
        paths.append(plots.plot_importance(importances, output_dir / "importance.svg"))
    if correlations is not None:
        paths.append(plots.plot_correlations(correlations.to_numpy(), list(correlations.columns), output_dir / "correlations.svg"))
    if window is not None:
        paths.append(plots.plot_raw_signal(window, output_dir / "raw_signal.svg"))
    return paths


def write_report(
    report: ExperimentReport,
    output_dir: Union[str, Path],
    window: Optional[SessionWindow] = None,
) -> List[Path]:
    """
    写出全部报告文件

    Args:
        report: 实验报告
        output_dir: 输出目录
        window: 用于原始信号图的窗口，可选

    Returns:
        写出的文件路径
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    doc = report.to_dict()
    models = list(doc["models"].values())

    report_path = output_dir / REPORT_FILE
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")

    paths = [report_path]
    _auc_frame(models).to_csv(output_dir / AUC_TABLE_FILE, index=False)
    _roc_frame(models).to_csv(output_dir / ROC_FILE, index=False)
    paths += [output_dir / AUC_TABLE_FILE, output_dir / ROC_FILE]

    importances = _importances(models)
    if importances:
        frame = pd.DataFrame({"feature": list(importances), "coefficient": list(importances.values())})
        frame.to_csv(output_dir / IMPORTANCE_FILE, index=False)
        paths.append(output_dir / IMPORTANCE_FILE)

    correlations = None
    if report.correlations is not None:
        report.correlations.to_csv(output_dir / CORRELATIONS_FILE)
        correlations = report.correlations.to_frame()
        paths.append(output_dir / CORRELATIONS_FILE)

    paths += write_figures(doc, output_dir, correlations, window)
    logger.info(f"Wrote {len(paths)} report files to {output_dir}")
    return paths


def load_report(output_dir: Union[str, Path]) -> Dict[str, Any]:
    """读取已有的 report.json"""
    path = Path(output_dir) / REPORT_FILE
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"No report found at {path}")


def rerender(output_dir: Union[str, Path]) -> str:
    """
    根据已有报告文件重新生成汇总表与图表

    Returns:
        汇总表文本
    """
    output_dir = Path(output_dir)
    doc = load_report(output_dir)
    correlations = None
    corr_path = output_dir / CORRELATIONS_FILE
    if corr_path.is_file():
        correlations = pd.read_csv(corr_path, index_col="variable", float_precision="round_trip")
    write_figures(doc, output_dir, correlations)
    order = doc.get("settings", {}).get("models") or sorted(doc["models"])
    return render_auc_table([doc["models"][name] for name in order if name in doc["models"]])
