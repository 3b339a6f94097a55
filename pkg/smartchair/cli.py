"""
命令行入口 - 模拟、采集、特征提取、训练与评估

子命令：simulate, serve, replay, extract, train, evaluate, run, report
退出码：0 成功，2 配置错误，3 数据错误，4 内部错误
"""

import argparse
import logging
import socket
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from smartchair import __version__
from smartchair.config import ExperimentConfig, settings
from smartchair.core.errors import (
    EXIT_INTERNAL,
    EXIT_OK,
    BindError,
    ConfigError,
    SmartChairError,
    exit_code_for,
)
from smartchair.core.logger import setup_logging
from smartchair.models.features import Dataset
from smartchair.models.profile import PopulationSpec
from smartchair.models.sample import PlayerLog

logger = logging.getLogger("smartchair.cli")

FEATURES_FILE = "features.csv"
POPULATION_FILE = "population.json"


# ---- 配置 ----


def _config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """命令行中显式给出的实验配置字段"""
    names = ExperimentConfig.__dataclass_fields__
    overrides = {key: value for key, value in vars(args).items() if key in names}
    if isinstance(overrides.get("models"), str):
        overrides["models"] = [m.strip() for m in overrides["models"].split(",") if m.strip()]
    return overrides


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """
    文件配置 + 命令行覆盖，命令行优先

    Args:
        args: 解析后的参数

    Returns:
        校验过的实验配置
    """
    config = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    config = config.merge(_config_overrides(args))
    config.validate()
    return config


def load_logs(config: ExperimentConfig) -> List[PlayerLog]:
    """按配置读取日志：日志目录 > 网关存储 > 按人群规格直接模拟"""
    from smartchair.services.log_io import load_log_directory
    from smartchair.services.session_store import SessionStore
    from smartchair.services.simulator import generate_population

    if config.logs_dir:
        logs = load_log_directory(config.logs_dir)
    elif config.store_root:
        logs = SessionStore(config.store_root).load_sealed_logs()
    elif config.population_spec:
        logs = generate_population(PopulationSpec.from_file(config.population_spec))
    else:
        raise ConfigError("No data source: give --logs-dir, --store-root or --population-spec")
    if not logs:
        raise ConfigError("The data source holds no player logs")
    return logs


def load_dataset(config: ExperimentConfig, features: Optional[str] = None) -> Dataset:
    from smartchair.services.feature_service import build_dataset

    if features:
        if not Path(features).is_file():
            raise ConfigError(f"Feature file not found: {features}")
        return Dataset.read_csv(features)
    return build_dataset(load_logs(config), config.window_seconds, config.completeness_fraction, config.threshold_g)


# ---- 子命令 ----


def cmd_simulate(args: argparse.Namespace) -> int:
    from smartchair.services.simulator import generate_population, write_population

    spec = PopulationSpec.from_file(args.population_spec) if args.population_spec else PopulationSpec()
    overrides: Dict[str, Any] = {}
    if args.players is not None:
        overrides.update(n_high=args.players // 2, n_low=args.players - args.players // 2, n_intermediate=0)
    if args.minutes is not None:
        overrides["session_minutes"] = args.minutes
    if args.gap_rate is not None:
        overrides["gap_rate"] = args.gap_rate
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    spec = PopulationSpec.from_dict({**spec.to_dict(), **overrides})

    out = Path(args.logs_dir or "./logs")
    try:
        out.mkdir(parents=True, exist_ok=True)
        logs = generate_population(spec)
        write_population(logs, out)
        (out / POPULATION_FILE).write_text(spec.to_json() + "\n", encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot write logs to {out}: {e}")

    print(f"Wrote {len(logs)} logs to {out}")
    return EXIT_OK


def _check_port_free(host: str, port: int) -> None:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            probe.bind((host, port))
        except OSError as e:
            raise BindError(f"Cannot bind {host}:{port}: {e}", host=host, port=port)


def cmd_serve(args: argparse.Namespace) -> int:
    from smartchair.api.gateway_api import serve

    if args.host:
        settings.HOST = args.host
    if args.port is not None:
        settings.PORT = str(args.port)
    if args.store_root:
        settings.STORAGE_ROOT = args.store_root
    if args.max_batch_size is not None:
        settings.MAX_BATCH_SIZE = str(args.max_batch_size)
    settings.validate()

    _check_port_free(settings.HOST, settings.port)
    serve(settings.HOST, settings.port, settings.STORAGE_ROOT, settings.max_batch_size, args.log_level or settings.LOG_LEVEL)
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    from smartchair.api.replay_client import ReplayClient
    from smartchair.services.log_io import load_log_directory

    # 命令行优先，其次是配置文件，最后是本机网关
    config = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    logs_dir = args.logs_dir or config.logs_dir
    if not logs_dir or not Path(logs_dir).is_dir():
        raise ConfigError(f"Logs directory not found: {logs_dir}")
    url = args.gateway_url or config.gateway_url or f"http://localhost:{settings.port}"
    client = ReplayClient(url)

    total_retries = 0
    logs = load_log_directory(logs_dir)
    for log in logs:
        summary = client.replay(log, speed=args.speed, close=not args.no_close)
        total_retries += summary.retries
    print(f"Replayed {len(logs)} logs to {url} with {total_retries} retries")
    return EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    from smartchair.services.feature_service import correlation_matrix, feature_table

    config = build_config(args)
    dataset = load_dataset(config)
    out = Path(args.features or Path(config.output_dir) / FEATURES_FILE)
    out.parent.mkdir(parents=True, exist_ok=True)
    dataset.to_csv(str(out))
    correlation_matrix(dataset).to_csv(str(out.with_name("correlations.csv")))

    logger.debug(f"Class means:\n{feature_table(dataset)}")
    print(f"Wrote {dataset.n_rows} windows from {len(dataset.players())} players to {out}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    from smartchair.evaluation.experiment import model_specs
    from smartchair.learners.registry import fit_model

    config = build_config(args)
    dataset = load_dataset(config, args.features)
    spec = model_specs(config.merge({"models": [args.model]}))[0]
    if spec.name == "rf":
        spec = spec.with_params(seed=config.seed)

    pipeline = fit_model(spec, dataset.X, dataset.y, dataset.feature_names)
    out = Path(args.model_out or Path(config.output_dir) / f"{spec.name}.model.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(pipeline.to_json() + "\n", encoding="utf-8")
    print(f"Trained {spec.label} on {dataset.n_rows} windows, model written to {out}")
    return EXIT_OK


def _evaluate(config: ExperimentConfig, dataset: Dataset, logs: Optional[List[PlayerLog]] = None) -> int:
    from smartchair.evaluation.report import evaluate_dataset, render_auc_table, write_report
    from smartchair.services.telemetry import segment_windows

    report = evaluate_dataset(dataset, config)
    window = None
    for log in logs or []:
        windows = segment_windows(log, config.window_seconds, config.completeness_fraction)
        if windows:
            window = windows[0]
            break
    write_report(report, config.output_dir, window)
    print(render_auc_table(report.models))
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = build_config(args)
    return _evaluate(config, load_dataset(config, args.features))


def cmd_run(args: argparse.Namespace) -> int:
    from smartchair.services.feature_service import build_dataset

    config = build_config(args)
    logs = load_logs(config)
    dataset = build_dataset(logs, config.window_seconds, config.completeness_fraction, config.threshold_g)
    return _evaluate(config, dataset, logs)


def cmd_report(args: argparse.Namespace) -> int:
    from smartchair.evaluation.report import rerender

    print(rerender(args.output_dir or "./report"))
    return EXIT_OK


# ---- 参数解析 ----


def _add_experiment_flags(parser: argparse.ArgumentParser, features: bool = True, models: bool = True) -> None:
    parser.add_argument("--population-spec", dest="population_spec", help="population spec JSON; simulates logs in memory")
    parser.add_argument("--logs-dir", dest="logs_dir", help="directory of JSONL logs")
    parser.add_argument("--store-root", dest="store_root", help="gateway storage root, sealed sessions are used")
    parser.add_argument("--output-dir", dest="output_dir", help="report directory")
    parser.add_argument("--seed", type=int)
    if features:
        group = parser.add_argument_group("features")
        group.add_argument("--threshold-g", dest="threshold_g", type=float)
        group.add_argument("--window-seconds", dest="window_seconds", type=float)
        group.add_argument("--completeness", dest="completeness_fraction", type=float)
    if models:
        group = parser.add_argument_group("models")
        group.add_argument("--models", help="comma separated subset of lr,svm,knn,rf")
        group.add_argument("--lr-l2", dest="lr_l2", type=float)
        group.add_argument("--lr-max-iter", dest="lr_max_iter", type=int)
        group.add_argument("--lr-tol", dest="lr_tol", type=float)
        group.add_argument("--svm-gamma", dest="svm_gamma", type=float)
        group.add_argument("--svm-epochs", dest="svm_epochs", type=int)
        group.add_argument("--svm-eta0", dest="svm_eta0", type=float)
        group.add_argument("--knn-k", dest="knn_k", type=int)
        group.add_argument("--rf-n-trees", dest="rf_n_trees", type=int)
        group.add_argument("--rf-max-depth", dest="rf_max_depth", type=int)
        group.add_argument("--rf-min-leaf", dest="rf_min_leaf", type=int)


def _add_evaluation_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("evaluation")
    group.add_argument("--n-repeats", dest="n_repeats", type=int)
    group.add_argument("--holdout", type=int, nargs="+", help="players held out per repeat; several values are drawn uniformly")
    group.add_argument("--per-player", dest="per_player", action="store_true", default=None)
    group.add_argument("--shuffle-labels", dest="shuffle_labels", action="store_true", default=None, help="null run")
    group.add_argument("--roc-repeat", dest="roc_repeat", type=int)
    group.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smartchair", description="Smart-chair eSports skill prediction pipeline")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="experiment config JSON; flags override its values")
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic player logs")
    p.add_argument("--population-spec", dest="population_spec")
    p.add_argument("--logs-dir", dest="logs_dir", help="output directory (default ./logs)")
    p.add_argument("--players", type=int, help="total players, split evenly between the two classes")
    p.add_argument("--minutes", type=float, help="session length in minutes")
    p.add_argument("--gap-rate", dest="gap_rate", type=float)
    p.add_argument("--seed", type=int, help="master seed")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("serve", help="run the ingest gateway")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--store-root", dest="store_root")
    p.add_argument("--max-batch-size", dest="max_batch_size", type=int)
    p.set_defaults(handler=cmd_serve)

    p = sub.add_parser("replay", help="stream logs to a running gateway")
    p.add_argument("--logs-dir", dest="logs_dir", help="directory of JSONL logs (default from --config)")
    p.add_argument("--gateway-url", dest="gateway_url", help="gateway address (default from --config, then localhost)")
    p.add_argument("--speed", type=float, default=0.0, help="playback speed, 0 is as fast as possible")
    p.add_argument("--no-close", dest="no_close", action="store_true")
    p.set_defaults(handler=cmd_replay)

    p = sub.add_parser("extract", help="windows and features to CSV")
    _add_experiment_flags(p, models=False)
    p.add_argument("--features", help="output CSV (default <output-dir>/features.csv)")
    p.set_defaults(handler=cmd_extract)

    p = sub.add_parser("train", help="fit one model on all windows")
    _add_experiment_flags(p)
    p.add_argument("--features", help="feature CSV from extract")
    p.add_argument("--model", choices=["lr", "svm", "knn", "rf"], default="lr")
    p.add_argument("--model-out", dest="model_out")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", help="repeated group hold-out evaluation")
    _add_experiment_flags(p)
    _add_evaluation_flags(p)
    p.add_argument("--features", help="feature CSV from extract")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("run", help="logs to report in one go")
    _add_experiment_flags(p)
    _add_evaluation_flags(p)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("report", help="re-render the table and figures of an existing report")
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(handler=cmd_report)

    return parser


def _origin(error: BaseException) -> str:
    """异常抛出处所在的模块名"""
    tb = error.__traceback__
    if tb is None:
        return "unknown"
    while tb.tb_next is not None:
        tb = tb.tb_next
    return tb.tb_frame.f_globals.get("__name__", "unknown")


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令行主函数

    Args:
        argv: 参数列表，默认取 sys.argv

    Returns:
        退出码
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except SmartChairError as e:
        logger.error(f"{args.command} failed in {_origin(e)}: {type(e).__name__}: {e.message}")
        return exit_code_for(e)
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return EXIT_INTERNAL
    except Exception as e:
        logger.exception(f"{args.command} failed with an internal error: {e}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
