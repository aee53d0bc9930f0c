"""Command-line interface for the curvmix toolkit."""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Iterable
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np

from curvmix.config import load_pipeline_from_yaml, resolve_threads
from curvmix.errors import ArgumentError, CurvmixError
from curvmix.mixopt import MixingMatrix, SolverOptions, factor, solve_mixing
from curvmix.noisegen import NoiseStream
from curvmix.orchestration import random_hessian, run_pipeline
from curvmix.quadsim import QuadProblem, band_sweep
from curvmix.reports import write_html
from curvmix.spectrum import (
    EigenSpectrum,
    SymmetricOperator,
    dense_eigs,
    extrapolate,
    fit_tail,
    lanczos_topk,
    truncate_negative,
)
from curvmix.trainer import (
    Dataset,
    ModelParams,
    TrainConfig,
    accountant_handoff,
    hessian_operator,
    load_dataset,
    make_synthetic_task,
    private_train,
    training_loss,
)
from curvmix.utils.artifacts import (
    read_gram,
    read_json,
    read_matrix,
    read_mixing,
    read_spectrum,
    read_tail_fit,
    read_workload,
    write_gram,
    write_json,
    write_matrix,
    write_mixing,
    write_table,
    write_workload,
)
from curvmix.utils.logging import bind_run_context, configure_logging, get_logger
from curvmix.workload import curvature_workload, identity_workload, prefix_workload

LOGGER = get_logger(__name__)

DEFAULT_OUT_DIR = "curvmix-out"


def _expand_patterns(patterns: Iterable[str]) -> list[Path]:
    """Expand glob patterns relative to the current directory."""
    matches: set[Path] = set()
    for pattern in patterns:
        path = Path(pattern)
        if path.is_absolute():
            if path.exists():
                matches.add(path)
            else:
                matches.update(path.parent.glob(path.name))
            continue

        for match in Path().glob(pattern):
            matches.add(Path(match))
    return sorted(matches)


def _seed(args: argparse.Namespace) -> int:
    return 0 if args.seed is None else int(args.seed)


def _emit_json(args: argparse.Namespace, data: Any) -> None:
    """Write ``data`` to ``--out`` when given, otherwise to stdout."""
    if args.out:
        write_json(args.out, data)
        LOGGER.info("wrote-json", path=str(args.out))
    else:
        json.dump(data, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def _require_out(args: argparse.Namespace) -> Path:
    if not args.out:
        message = f"command '{args.cmd}' needs --out"
        raise ArgumentError(message)
    return Path(args.out)


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out or DEFAULT_OUT_DIR)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _solver_options(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions(tol=args.tol, max_iters=args.max_iters)


def cmd_spectrum(args: argparse.Namespace) -> int:
    """Execute the ``spectrum`` subcommand family.

    Args:
        args: Parsed CLI arguments namespace.

    Returns:
        Exit status code.
    """
    action = args.spectrum_cmd
    if action == "lanczos":
        if args.matrix:
            matrix, _ = read_matrix(args.matrix)
            op = SymmetricOperator.from_matrix(matrix)
        elif args.dataset:
            data = load_dataset(args.dataset)
            params = (
                ModelParams.from_dict(read_json(args.weights))
                if args.weights
                else ModelParams.zeros(data.f)
            )
            op = hessian_operator(data, params, args.model)
        else:
            message = "spectrum lanczos needs --matrix or --dataset"
            raise ArgumentError(message)
        result = lanczos_topk(op, args.k, max_iters=args.max_iters, seed=_seed(args))
    elif action == "dense":
        matrix, _ = read_matrix(args.matrix)
        result = dense_eigs(matrix)
    elif action == "truncate":
        result = truncate_negative(read_spectrum(args.input))
    elif action == "fit":
        fit = fit_tail(read_spectrum(args.topk), args.p_plus, args.mu_pplus)
        _emit_json(args, fit.to_dict())
        return 0
    else:
        result = extrapolate(read_tail_fit(args.fit), read_spectrum(args.topk), args.p)
    _emit_json(args, result.to_dict())
    return 0


def cmd_workload(args: argparse.Namespace) -> int:
    """Execute the ``workload`` subcommand.

    Args:
        args: Parsed CLI arguments namespace.

    Returns:
        Exit status code.
    """
    out = _require_out(args)
    if args.kind == "curvature":
        if not args.spectrum or args.eta is None:
            message = "curvature workload needs --spectrum and --eta"
            raise ArgumentError(message)
        workload = curvature_workload(read_spectrum(args.spectrum), args.eta, args.T)
    elif args.kind == "identity":
        workload = identity_workload(args.T)
    else:
        workload = prefix_workload(args.T)
    write_workload(out, workload)
    LOGGER.info("wrote-workload", path=str(out), kind=args.kind, T=args.T)
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    """Execute the ``optimize`` subcommand.

    The gram matrix goes to ``--out`` and the solve report to ``--report`` (stdout
    when omitted).

    Args:
        args: Parsed CLI arguments namespace.

    Returns:
        Exit status code.
    """
    out = _require_out(args)
    gram, report = solve_mixing(read_workload(args.workload), args.band, _solver_options(args))
    write_gram(out, gram)
    if args.report:
        write_json(args.report, report.to_dict())
    else:
        json.dump(report.to_dict(), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


def cmd_factor(args: argparse.Namespace) -> int:
    """Execute the ``factor`` subcommand."""
    out = _require_out(args)
    write_mixing(out, factor(read_gram(args.gram)))
    return 0


def cmd_noise(args: argparse.Namespace) -> int:
    """Execute the ``noise`` subcommand: dump the first ``--steps`` noise vectors."""
    out = _require_out(args)
    mixing = read_mixing(args.mixing)
    stream = NoiseStream(
        mixing,
        args.p,
        seed=_seed(args),
        scale=args.scale,
        threads=resolve_threads(args.threads),
    )
    steps = mixing.T if args.steps is None else args.steps
    meta = {"seed": _seed(args), "scale": args.scale, "p": args.p, "band": mixing.band}
    write_matrix(out, stream.dump(steps), meta)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    """Execute the ``simulate`` subcommand.

    Writes ``sweep.csv`` (excess loss against band size per design workload) and
    ``simulation.json`` (one report per row) into ``--out``.

    Args:
        args: Parsed CLI arguments namespace.

    Returns:
        Exit status code.
    """
    out = _out_dir(args)
    seed = _seed(args)
    if args.hessian:
        hess, _ = read_matrix(args.hessian)
    else:
        hess = random_hessian(args.p, seed)
    p = hess.shape[0]
    problem = QuadProblem(hess=hess, d=np.zeros(p), w0=np.ones(p), eta=args.eta, T=args.T)
    frame = band_sweep(
        problem,
        args.bands or sorted({1, args.T}),
        noise_scale=args.noise_scale,
        trials=args.trials,
        seed=seed,
        kinds=args.kinds,
        opts=_solver_options(args),
        threads=resolve_threads(args.threads),
    )
    write_table(out / "sweep.csv", frame)
    params = {"p": p, "T": args.T, "eta": args.eta, "noise_scale": args.noise_scale}
    reports = [
        {
            "closed_form": row["closed_form"],
            "mc_mean": row["mc_mean"],
            "mc_std_error": row["mc_std_error"],
            "trials": args.trials,
            "seed": seed,
            "params": {**params, "band": int(row["band"]), "workload": row["workload"]},
        }
        for row in frame.to_dict(orient="records")
    ]
    write_json(out / "simulation.json", reports)
    LOGGER.info("wrote-simulation", out=str(out), rows=len(reports))
    return 0


def _public_curvature(
    args: argparse.Namespace,
    cfg: TrainConfig,
    data: Dataset,
) -> EigenSpectrum:
    """Curvature spectrum for the training design, never read from the training records.

    Sources, in order: ``--spectrum``, ``--public-dataset``, then a public split of the
    synthetic task when no ``--dataset`` was given.
    """
    if args.spectrum:
        return truncate_negative(read_spectrum(args.spectrum))
    if args.public_dataset:
        public = load_dataset(args.public_dataset)
        if public.f != data.f:
            message = f"public dataset has {public.f} features, training data has {data.f}"
            raise ArgumentError(message)
    elif args.dataset:
        message = (
            "curvature design for --dataset needs --public-dataset, --spectrum or --mixing;"
            " the training set is not used for curvature"
        )
        raise ArgumentError(message)
    else:
        public = make_synthetic_task(
            args.public_n, data.f, cfg.model_kind, cfg.seed, split="public"
        )
    op = hessian_operator(public, ModelParams.zeros(public.f), cfg.model_kind)
    LOGGER.info("public-curvature", records=public.n, dim=op.dim)
    return truncate_negative(lanczos_topk(op, min(op.dim, 64), seed=cfg.seed))


def _training_mixing(
    args: argparse.Namespace,
    cfg: TrainConfig,
    data: Dataset,
) -> MixingMatrix:
    """Mixing matrix for training: from ``--mixing`` or solved for ``--design``."""
    if args.mixing:
        return read_mixing(args.mixing)
    if args.design == "identity" or cfg.b == 1:
        workload = identity_workload(cfg.T)
    else:
        workload = curvature_workload(_public_curvature(args, cfg, data), cfg.eta, cfg.T)
    gram, _ = solve_mixing(workload, cfg.b, _solver_options(args))
    return factor(gram)


def cmd_train(args: argparse.Namespace) -> int:
    """Execute the ``train`` subcommand.

    Writes ``model.json``, ``train_log.csv``, ``accountant.json`` and ``mixing.csv``
    into ``--out``.

    Args:
        args: Parsed CLI arguments namespace.

    Returns:
        Exit status code.
    """
    out = _out_dir(args)
    if args.dataset:
        data = load_dataset(args.dataset)
    else:
        data = make_synthetic_task(args.n, args.f, args.model, _seed(args))
    cfg = TrainConfig(
        T=args.T,
        b=args.band,
        batch=args.batch,
        clip=args.clip,
        sigma=args.sigma,
        eta=args.eta,
        seed=_seed(args),
        model_kind=args.model,
    )
    mixing = _training_mixing(args, cfg, data)
    params, log = private_train(data, cfg, mixing)
    write_json(out / "model.json", params.to_dict())
    write_table(out / "train_log.csv", log)
    handoff = accountant_handoff(data.n, cfg.batch, cfg.b, cfg.T, cfg.sigma)
    write_json(out / "accountant.json", handoff)
    write_mixing(out / "mixing.csv", mixing)
    LOGGER.info(
        "wrote-training",
        out=str(out),
        final_loss=training_loss(data, params, cfg.model_kind),
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    """Execute the ``report`` subcommand.

    Args:
        args: Parsed CLI arguments namespace.

    Returns:
        Exit status code.
    """
    sources = _expand_patterns(args.input)
    records = []
    for path in sources:
        document = read_json(path)
        if isinstance(document, list):
            records.extend(
                (f"{path.name}[{i}]", item)
                for i, item in enumerate(document)
                if isinstance(item, dict)
            )
        elif isinstance(document, dict):
            records.append((path.name, document))
    out_path = Path(args.output)
    write_html(records, out_path)
    LOGGER.info("wrote-report", path=str(out_path), reports=len(records))
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    """Execute the ``pipeline`` subcommand: run a YAML-configured end-to-end flow.

    Args:
        args: Parsed CLI arguments namespace.

    Returns:
        Exit status code.
    """
    config = load_pipeline_from_yaml(args.config)
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = int(args.seed)
    if args.threads is not None:
        overrides["threads"] = resolve_threads(args.threads)
    if overrides:
        config = replace(config, **overrides)

    state = run_pipeline(config)
    if state.get("error"):
        LOGGER.error("pipeline-failed", error=state["error"])
        sys.stderr.write(f"curvmix: error: {state['error']}\n")
        return int(state.get("exit_code", 1))

    out = _out_dir(args)
    write_json(out / "spectrum.json", state["spectrum"].to_dict())
    if state.get("tail_fit") is not None:
        write_json(out / "tail_fit.json", state["tail_fit"].to_dict())
    write_workload(out / "workload.csv", state["workload"])
    for band, (gram, report) in state["solves"].items():
        write_gram(out / f"gram_b{band}.csv", gram)
        write_json(out / f"solve_b{band}.json", report.to_dict())
        write_mixing(out / f"mixing_b{band}.csv", state["mixings"][band])
    write_json(
        out / "simulation.json",
        {"name": config.name, "seed": config.seed, "rows": state["simulations"]},
    )
    LOGGER.info("wrote-pipeline", out=str(out), name=config.name)
    return 0


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--log-level", default="WARNING")
    common.add_argument("--log-format", choices=["json", "console"], default="json")
    return common


def _solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=SolverOptions.tol)
    parser.add_argument("--max-iters", type=int, default=SolverOptions.max_iters)


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser for the CLI.

    Returns:
        Configured argument parser.
    """
    common = _common_parser()
    p = argparse.ArgumentParser(prog="curvmix", description="curvmix CLI")
    sub = p.add_subparsers(dest="cmd", required=True)

    ps = sub.add_parser("spectrum")
    ssub = ps.add_subparsers(dest="spectrum_cmd", required=True)
    psl = ssub.add_parser("lanczos", parents=[common])
    psl.add_argument("--matrix")
    psl.add_argument("--dataset")
    psl.add_argument("--model", choices=["linear", "logistic"], default="logistic")
    psl.add_argument("--weights")
    psl.add_argument("--k", type=int, required=True)
    psl.add_argument("--max-iters", type=int, default=None)
    psd = ssub.add_parser("dense", parents=[common])
    psd.add_argument("--matrix", required=True)
    pst = ssub.add_parser("truncate", parents=[common])
    pst.add_argument("--in", dest="input", required=True)
    psf = ssub.add_parser("fit", parents=[common])
    psf.add_argument("--topk", required=True)
    psf.add_argument("--p-plus", type=int, required=True)
    psf.add_argument("--mu-pplus", type=float, required=True)
    pse = ssub.add_parser("extrapolate", parents=[common])
    pse.add_argument("--topk", required=True)
    pse.add_argument("--fit", required=True)
    pse.add_argument("--p", type=int, required=True)
    for leaf in (psl, psd, pst, psf, pse):
        leaf.set_defaults(func=cmd_spectrum)

    pw = sub.add_parser("workload", parents=[common])
    pw.add_argument("--kind", choices=["curvature", "identity", "prefix"], required=True)
    pw.add_argument("--T", type=int, required=True)
    pw.add_argument("--spectrum")
    pw.add_argument("--eta", type=float)
    pw.set_defaults(func=cmd_workload)

    po = sub.add_parser("optimize", parents=[common])
    po.add_argument("--workload", required=True)
    po.add_argument("--band", type=int, required=True)
    po.add_argument("--report")
    _solver_flags(po)
    po.set_defaults(func=cmd_optimize)

    pf = sub.add_parser("factor", parents=[common])
    pf.add_argument("--gram", required=True)
    pf.set_defaults(func=cmd_factor)

    pn = sub.add_parser("noise", parents=[common])
    pn.add_argument("--mixing", required=True)
    pn.add_argument("--p", type=int, required=True)
    pn.add_argument("--steps", type=int)
    pn.add_argument("--scale", type=float, default=1.0)
    pn.set_defaults(func=cmd_noise)

    pm = sub.add_parser("simulate", parents=[common])
    pm.add_argument("--hessian")
    pm.add_argument("--p", type=int, default=4)
    pm.add_argument("--T", type=int, required=True)
    pm.add_argument("--eta", type=float, default=0.1)
    pm.add_argument("--bands", type=int, nargs="+")
    pm.add_argument(
        "--kinds",
        nargs="+",
        choices=["curvature", "identity", "prefix"],
        default=["curvature", "identity"],
    )
    pm.add_argument("--trials", type=int, default=10_000)
    pm.add_argument("--noise-scale", type=float, default=1.0)
    _solver_flags(pm)
    pm.set_defaults(func=cmd_simulate)

    ptr = sub.add_parser("train", parents=[common])
    ptr.add_argument("--dataset")
    ptr.add_argument("--n", type=int, default=2000)
    ptr.add_argument("--f", type=int, default=20)
    ptr.add_argument("--model", choices=["linear", "logistic"], default="logistic")
    ptr.add_argument("--T", type=int, required=True)
    ptr.add_argument("--band", type=int, default=1)
    ptr.add_argument("--batch", type=int, required=True)
    ptr.add_argument("--clip", type=float, default=1.0)
    ptr.add_argument("--sigma", type=float, default=1.0)
    ptr.add_argument("--eta", type=float, default=0.1)
    ptr.add_argument("--mixing")
    ptr.add_argument("--public-dataset")
    ptr.add_argument("--public-n", type=int, default=2000)
    ptr.add_argument("--spectrum")
    ptr.add_argument("--design", choices=["curvature", "identity"], default="curvature")
    _solver_flags(ptr)
    ptr.set_defaults(func=cmd_train)

    prep = sub.add_parser("report", parents=[common])
    prep.add_argument("--input", nargs="+", required=True)
    prep.add_argument("--output", required=True)
    prep.set_defaults(func=cmd_report)

    ppl = sub.add_parser("pipeline", parents=[common])
    ppl.add_argument("--config", required=True)
    ppl.set_defaults(func=cmd_pipeline)

    return p


def main(argv: list[str] | None = None) -> int:
    """Entry point for the CLI.

    Args:
        argv: Optional list of command-line arguments.

    Returns:
        Exit status code: 0 on success, 2 for argument errors, 3 for numerical
        failures and 4 for file errors.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        handler = args.func
    except AttributeError as exc:  # pragma: no cover - argparse guarantees attribute
        message = "Parser did not set a handler"
        raise TypeError(message) from exc

    if not callable(handler):
        message = "Parser returned a non-callable handler"
        raise TypeError(message)

    configure_logging(args.log_level, json=args.log_format == "json")
    bind_run_context(command=args.cmd, seed=args.seed)

    try:
        result = handler(args)
    except CurvmixError as exc:
        sys.stderr.write(f"curvmix: error: {exc}\n")
        return exc.exit_code
    if not isinstance(result, int):
        message = f"Handler returned non-integer exit code: {result!r}"
        raise TypeError(message)

    return result


if __name__ == "__main__":
    raise SystemExit(main())
