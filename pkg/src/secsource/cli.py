"""Command-line front end: configuration ingestion, dispatch, CSV output.

Subcommands
-----------
compute-region    trace the lossy boundary over distortion targets
lossless-region   evaluate the lossless bounds for a fixed (V, Q) scheme
gaussian          sweep the closed-form Gaussian boundary over an alpha grid
simulate          run the random-binning codec and report empirical measures
check-channel     degradedness certificate / less-noisy falsification

All randomized commands take an explicit ``--seed`` (default 2022) so every
CSV artifact is reproducible.  CSV columns are fixed per command:
regions -> (d, rw_bits, rs_bits, rl_bits, regime),
gaussian -> (alpha, rw_bits, rs_bits, rl_bits, d),
simulate -> (n, error_rate, distortion, leak_secrecy_bits, leak_privacy_bits).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import binning, channels, gaussian, modelio, regions
from .probability import ModelError, build_joint

DEFAULT_SEED = 2022

REGION_HEADER = ["d", "rw_bits", "rs_bits", "rl_bits", "regime"]
GAUSSIAN_HEADER = ["alpha", "rw_bits", "rs_bits", "rl_bits", "d"]
SIMULATE_HEADER = ["n", "error_rate", "distortion", "leak_secrecy_bits", "leak_privacy_bits"]


@dataclass
class RunConfig:
    """Validated invocation of one subcommand."""

    command: str
    model: Optional[Path] = None
    aux: Optional[Path] = None
    channel_pair: Optional[Path] = None
    output: Optional[Path] = None
    seed: int = DEFAULT_SEED
    r0: float = 0.0
    targets: list[float] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)
    rho: tuple[float, float, float] = (0.0, 0.0, 0.0)
    samples: int = 0
    n: int = 0
    epsilon: float = 0.0
    trials: int = 0
    l_size: Optional[int] = None
    restarts: int = 8
    u_size: Optional[int] = None
    v_size: Optional[int] = None
    q_size: Optional[int] = None
    grid: bool = False
    grid_step: float = 0.05


def _fmt(value: float) -> str:
    return format(value, ".12g")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def dispatch(cfg: RunConfig) -> int:
    """Run the selected computation; returns the process exit status."""
    handler = {
        "compute-region": _run_compute_region,
        "lossless-region": _run_lossless_region,
        "gaussian": _run_gaussian,
        "simulate": _run_simulate,
        "check-channel": _run_check_channel,
    }[cfg.command]
    return handler(cfg)


def _run_compute_region(cfg: RunConfig) -> int:
    model = modelio.parse_model(cfg.model)
    metric = regions.DistortionMetric.hamming(model.xtilde_size)
    search = regions.SearchConfig(
        restarts=cfg.restarts,
        seed=cfg.seed,
        u_size=cfg.u_size,
        v_size=cfg.v_size,
        q_size=cfg.q_size,
        method="grid" if cfg.grid else "descent",
        grid_step=cfg.grid_step,
    )
    points = regions.trace_region(model, cfg.r0, metric, cfg.targets, search)
    rows = [
        [p.rates.d, p.rates.rw, p.rates.rs, p.rates.rl, p.report.regime]
        for p in points
    ]
    _write_csv(cfg.output, REGION_HEADER, rows)
    print(f"compute-region: {len(rows)} point(s) written to {cfg.output}")
    return 0


def _run_lossless_region(cfg: RunConfig) -> int:
    model = modelio.parse_model(cfg.model)
    joint = build_joint(model)
    if cfg.aux is not None:
        scheme = modelio.parse_aux(cfg.aux)
        aux_v, aux_q = scheme.p_v_given_u, scheme.p_q_given_v
        if aux_v.input_size != model.xtilde_size:
            raise ModelError("lossless aux file must give P(V|Xt): rows over Xt")
    else:
        from .probability import StochasticMatrix

        aux_v = StochasticMatrix.constant(model.xtilde_size, 1)
        aux_q = StochasticMatrix.constant(1, 1)
    report = regions.lossless_point(joint, aux_v, aux_q, cfg.r0)
    rows = [[0.0, report.bounds.rw, report.bounds.rs, report.bounds.rl, report.regime]]
    _write_csv(cfg.output, REGION_HEADER, rows)
    print(
        f"lossless-region: rw={_fmt(report.bounds.rw)} rs={_fmt(report.bounds.rs)} "
        f"rl={_fmt(report.bounds.rl)} regime={report.regime} -> {cfg.output}"
    )
    return 0


def _run_gaussian(cfg: RunConfig) -> int:
    model = gaussian.GaussianModel(*cfg.rho)
    trace = gaussian.gaussian_trace(model, cfg.alphas)
    rows = [[a, p.rw, p.rs, p.rl, p.d] for a, p in trace]
    _write_csv(cfg.output, GAUSSIAN_HEADER, rows)
    if cfg.samples > 0:
        checks = []
        for a, p in trace:
            emp, ana = gaussian.gaussian_mmse_check(model, a, cfg.samples, cfg.seed)
            checks.append(f"alpha={_fmt(a)}: empirical={emp:.6f} analytic={ana:.6f}")
        print(
            f"gaussian: {len(rows)} point(s) -> {cfg.output}; "
            f"MMSE check ({cfg.samples} samples): " + "; ".join(checks)
        )
    else:
        print(f"gaussian: {len(rows)} point(s) written to {cfg.output}")
    return 0


def _run_simulate(cfg: RunConfig) -> int:
    model = modelio.parse_model(cfg.model)
    scheme = modelio.parse_aux(cfg.aux)
    joint = build_joint(model)
    full = regions.extend_with_vu(joint, scheme)
    code = binning.design_code(
        full,
        n=cfg.n,
        epsilon=cfg.epsilon,
        r0=cfg.r0,
        seed=cfg.seed,
        reconstruction=scheme.reconstruction,
        metric=None
        if scheme.reconstruction is not None
        else regions.DistortionMetric.hamming(model.xtilde_size),
    )
    report = binning.run_experiment(code, model, cfg.trials, seed=cfg.seed)
    rows = [
        [
            report.n,
            report.error_rate,
            report.distortion,
            report.leak_secrecy,
            report.leak_privacy,
        ]
    ]
    _write_csv(cfg.output, SIMULATE_HEADER, rows)
    print(
        f"simulate: n={report.n} engine={report.engine} "
        f"error_rate={_fmt(report.error_rate)} -> {cfg.output}"
    )
    return 0


def _run_check_channel(cfg: RunConfig) -> int:
    if cfg.channel_pair is not None:
        p_y, p_z = modelio.parse_channel_pair(cfg.channel_pair)
    else:
        model = modelio.parse_model(cfg.model)
        p_y, p_z = model.p_y_given_x(), model.p_z_given_x()
    cert = channels.check_stochastic_degraded(p_y, p_z)
    if cert.feasible:
        print("degraded: yes (decoder channel = eavesdropper channel + post-processing)")
        print(f"residual: {cert.residual:.3e}")
        for i, row in enumerate(cert.witness.rows):
            print(f"witness[{i}]: " + " ".join(_fmt(v) for v in row))
        print("less-noisy: implied by degradedness certificate")
        return 0
    print(f"degraded: no (best residual {cert.residual:.3e})")
    trials = cfg.trials if cfg.trials > 0 else 200
    verdict = channels.less_noisy_falsify(
        p_y, p_z, trials=trials, l_size=cfg.l_size, seed=cfg.seed
    )
    if verdict.falsified:
        print(
            f"less-noisy: falsified after {verdict.trials_run} candidate(s): "
            f"I(L;Y)={_fmt(verdict.i_l_y)} > I(L;Z)={_fmt(verdict.i_l_z)}"
        )
        print("witness p_x: " + " ".join(_fmt(v) for v in verdict.witness_px.probs))
        for i, row in enumerate(verdict.witness_channel.rows):
            print(f"witness p_l_given_x[{i}]: " + " ".join(_fmt(v) for v in row))
    else:
        print(
            f"less-noisy: not falsified in {verdict.trials_run} candidate(s) "
            "(not a proof of the ordering)"
        )
    return 0


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secsource",
        description="Secure/private source-coding rate regions and binning simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cr = sub.add_parser("compute-region", help="trace the lossy region boundary")
    cr.add_argument("--model", type=Path, required=True)
    cr.add_argument("--r0", type=float, default=0.0)
    cr.add_argument("--targets", type=_float_list, required=True,
                    help="comma-separated distortion targets")
    cr.add_argument("--output", type=Path, required=True)
    cr.add_argument("--seed", type=int, default=DEFAULT_SEED)
    cr.add_argument("--restarts", type=int, default=8)
    cr.add_argument("--u-size", type=int, default=None)
    cr.add_argument("--v-size", type=int, default=None)
    cr.add_argument("--q-size", type=int, default=None)
    cr.add_argument("--grid", action="store_true",
                    help="use the exhaustive simplex-grid oracle")
    cr.add_argument("--grid-step", type=float, default=0.05)

    lr = sub.add_parser("lossless-region", help="evaluate the lossless bounds")
    lr.add_argument("--model", type=Path, required=True)
    lr.add_argument("--r0", type=float, default=0.0)
    lr.add_argument("--aux", type=Path, default=None,
                    help="aux file; p_v_given_u is read as P(V|Xt)")
    lr.add_argument("--output", type=Path, required=True)

    ga = sub.add_parser("gaussian", help="closed-form Gaussian boundary sweep")
    ga.add_argument("--rho-x", type=float, required=True)
    ga.add_argument("--rho-y", type=float, required=True)
    ga.add_argument("--rho-z", type=float, required=True)
    ga.add_argument("--alphas", type=_float_list, required=True)
    ga.add_argument("--samples", type=int, default=0,
                    help="when > 0, run the Monte-Carlo MMSE check per alpha")
    ga.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ga.add_argument("--output", type=Path, required=True)

    si = sub.add_parser("simulate", help="random-binning codec experiment")
    si.add_argument("--model", type=Path, required=True)
    si.add_argument("--aux", type=Path, required=True)
    si.add_argument("--n", type=int, required=True)
    si.add_argument("--epsilon", type=float, required=True)
    si.add_argument("--r0", type=float, default=0.0)
    si.add_argument("--trials", type=int, required=True)
    si.add_argument("--seed", type=int, default=DEFAULT_SEED)
    si.add_argument("--output", type=Path, required=True)

    cc = sub.add_parser("check-channel", help="degradedness / less-noisy check")
    group = cc.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", type=Path)
    group.add_argument("--channels", type=Path, dest="channel_pair")
    cc.add_argument("--trials", type=int, default=200)
    cc.add_argument("--l-size", type=int, default=None)
    cc.add_argument("--seed", type=int, default=DEFAULT_SEED)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in vars(cfg):
        if name == "command":
            continue
        attr = name if hasattr(args, name) else None
        if attr is not None:
            setattr(cfg, name, getattr(args, attr))
    if args.command == "gaussian":
        cfg.rho = (args.rho_x, args.rho_y, args.rho_z)
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _config_from_args(args)
    try:
        return dispatch(cfg)
    except (ModelError, ValueError, regions.InfeasibleTargetError,
            binning.BinningScaleError, binning.DecodeSearchError) as exc:
        print(f"{cfg.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
