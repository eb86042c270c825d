"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from typing import Optional, Sequence

from .diagnostics.experiments import ExperimentSpec, run_experiment
from .errors import CheckpointError, ConfigurationError, NumericalFailure
from .evolve import COMPLETED, DIVERGED, RunState, run
from .fields import NormRequest, make_initial, norm
from .io import (
    RunConfig,
    load_checkpoint,
    load_config,
    open_output,
    save_checkpoint,
    write_diagnostics,
    write_header,
)
from .mild import PicardConfig, picard_solve
from .regimes import classify
from .spectral import SpectralVectorField

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

EXPERIMENT_KINDS = {
    "scaling": "Scaling",
    "decay": "DecayProbe",
    "logsob": "LogSobolevSweep",
    "amplitude": "AmplitudeSweep",
    "picard-cross": "PicardCross",
}


class _Failed(Exception):
    """Numerical failure reported through a status rather than an exception."""


def _simulate(cfg: RunConfig, out_path, checkpoint_path, checkpoint_every: int,
              final_checkpoint, resume: Optional[RunState] = None) -> int:
    params = cfg.sim

    def checkpoint(state: RunState) -> None:
        save_checkpoint(checkpoint_path.format(step=state.step), params, state)

    stream = open_output(out_path)
    try:
        extra = None if resume is None else {"resumed_from": {"step": resume.step, "t": resume.t}}
        write_header(stream, cfg, extra)
        traj = run(
            params,
            on_record=lambda rec: write_diagnostics(stream, rec),
            on_checkpoint=checkpoint if checkpoint_path else None,
            checkpoint_every=checkpoint_every if checkpoint_path else 0,
            resume=resume,
        )
    finally:
        if stream is not sys.stdout:
            stream.close()
        else:
            stream.flush()
    if final_checkpoint:
        save_checkpoint(final_checkpoint, params, traj.state)
    if traj.status == DIVERGED:
        raise _Failed(traj.message)
    if traj.status != COMPLETED:
        print(f"warning: run ended with status {traj.status}: {traj.message}", file=sys.stderr)
    return EXIT_OK


def _io_opt(args, cfg: RunConfig, name: str, default=None):
    value = getattr(args, name, None)
    return value if value is not None else cfg.io.get(name, default)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    return _simulate(
        cfg,
        _io_opt(args, cfg, "out", "-"),
        _io_opt(args, cfg, "checkpoint"),
        int(_io_opt(args, cfg, "checkpoint_every", 0)),
        _io_opt(args, cfg, "final_checkpoint"),
    )


def cmd_resume(args) -> int:
    ck = load_checkpoint(args.checkpoint)
    params = ck.params
    if args.t_end is not None:
        params = dataclasses.replace(params, t_end=args.t_end)
    cfg = RunConfig(params)
    return _simulate(cfg, args.out or "-", args.checkpoint_out, args.checkpoint_every,
                     args.final_checkpoint, resume=ck.state)


def _picard_config(cfg: RunConfig) -> PicardConfig:
    p = cfg.sim
    kw = {}
    if "max_iters" in cfg.picard:
        kw["max_iters"] = int(cfg.picard["max_iters"])
    if "tol_rel" in cfg.picard:
        kw["tol_rel"] = float(cfg.picard["tol_rel"])
    return PicardConfig.for_regime(p.d, p.alpha, p.beta, p.t_end,
                                   int(cfg.picard.get("points", 64)), **kw)


def cmd_picard(args) -> int:
    cfg = load_config(args.config)
    pc = _picard_config(cfg)
    b0 = make_initial(cfg.sim.initial_condition(), cfg.sim.grid)
    res = picard_solve(b0, pc, cfg.sim)
    report = {
        "iterations": res.iterations,
        "converged": res.converged,
        "contraction_ratio": res.contraction_ratio,
        "distances": res.distances,
        "p": pc.p,
        "q": pc.q,
        "sigma": pc.sigma,
    }
    _emit_json(report, args.out)
    return EXIT_OK


def cmd_check_regime(args) -> int:
    rep = classify(args.d, args.alpha, args.beta, args.s, args.eta, args.p)
    print(rep.to_text())
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    opts = {k: v for k, v in cfg.experiment.items() if k != "kind"}
    for key in ("amplitudes", "logsob_N"):
        if key in opts:
            opts[key] = tuple(opts[key])
    if "picard" in args.kind:
        opts["picard_points"] = int(cfg.picard.get("points", 64))
    spec = ExperimentSpec(EXPERIMENT_KINDS[args.kind], cfg.sim, **opts)
    _emit_json(run_experiment(spec), args.out)
    return EXIT_OK


def cmd_norms(args) -> int:
    ck = load_checkpoint(args.checkpoint)
    b = SpectralVectorField(ck.params.grid, ck.state.coeffs)
    print(f"t = {format(ck.state.t, '.17g')}")
    for name in args.norm or ["L2", "H1"]:
        print(f"{name} = {format(norm(b, NormRequest.parse(name)), '.17g')}")
    return EXIT_OK


def _emit_json(obj, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracmag", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate the induction equation")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="NDJSON diagnostics path ('-' for stdout)")
    p.add_argument("--checkpoint", help="checkpoint path; may contain {step}")
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    p.add_argument("--final-checkpoint", dest="final_checkpoint")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("resume", help="continue a run from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--checkpoint-out", dest="checkpoint_out")
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int, default=0)
    p.add_argument("--final-checkpoint", dest="final_checkpoint")
    p.set_defaults(func=cmd_resume)

    p = sub.add_parser("picard", help="solve the mild formulation by fixed-point iteration")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_picard)

    p = sub.add_parser("check-regime", help="classify exponents")
    p.add_argument("--d", type=int, required=True)
    # strings keep decimal input exact (Fraction("1.8") == 9/5)
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--s", default="1")
    p.add_argument("--eta", default="0")
    p.add_argument("--p", default=None)
    p.set_defaults(func=cmd_check_regime)

    p = sub.add_parser("experiment", help="run a numerical experiment")
    p.add_argument("kind", choices=sorted(EXPERIMENT_KINDS))
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("norms", help="print norms of a checkpointed field")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--norm", action="append", help="e.g. L2, L4, Linf, H1, Hdot0.5")
    p.set_defaults(func=cmd_norms)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, _Failed) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CheckpointError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
