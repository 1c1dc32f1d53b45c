"""brlab command-line front door"""
import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from brlab.core import ExperimentConfig, GridConfig, QuadratureConfig
from brlab.errors import BrlabError, ConfigError, DomainError, InputError
from brlab.logging_config import configure_logging, get_logger
from brlab.models.fields import (GridSpec, save_field, save_kernel, save_multiplier,
                                 save_radial_profile)
from brlab.models.schemas import (Command, Experiment, OutputFormat, RunConfig,
                                  parse_float_list, parse_int_range)
from brlab.services.decomp import lambda_partition, make_variant
from brlab.services.engine import (PieceMultiplier, bochner_riesz_apply,
                                   bochner_riesz_kernel_apply, gaussian_field, i_alpha_apply,
                                   kernel_grid, materialize_kernels, multiplier_field)
from brlab.services.harness import DEFAULT_J_RANGES, HarnessService
from brlab.services.specfun import bessel_j
from brlab.services.sphere import CapGrid, SubsetFamily, cap_grid, select_subsets
from brlab.cli.config import build_run_config
from brlab.utils.io import read_json, rows_to_frame, write_csv, write_json

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

DEFAULT_RHO = "0.5,1,2,5,10,30,50"


def _banner(title: str) -> None:
    print("=" * 50)
    print(f"brlab - {title}")
    print("=" * 50)


def _threads(config: RunConfig) -> int:
    return config.threads or 0


# =============================================================================
# Subcommands
# =============================================================================


def _write_rows(config: RunConfig, rows: List[Dict[str, Any]], document: Dict[str, Any]) -> None:
    if config.format is OutputFormat.CSV:
        write_csv(config.out, rows_to_frame(rows), config.resolved())
    else:
        write_json(config.out, document)


def cmd_bessel(config: RunConfig) -> int:
    rho = np.asarray(parse_float_list(config.rho or DEFAULT_RHO))
    values = np.atleast_1d(bessel_j(config.order, rho))
    rows = [{"rho": float(r), "re": float(v.real), "im": float(v.imag)} for r, v in zip(rho, values)]
    if config.out:
        _write_rows(config, rows, {"config": config.resolved(), "order": config.order, "values": rows})
        print(f"✓ Wrote {len(rows)} values to {config.out}")
    else:
        for row in rows:
            print(f"J({row['rho']:.17g}) = {row['re']:.17g} {row['im']:+.17g}i")
    return EXIT_OK


def _variant(config: RunConfig):
    return make_variant(config.variant, config.alpha, config.beta, config.n, config.z)


def _kernel_grid(config: RunConfig, scale) -> GridSpec:
    return kernel_grid(scale, config.m, config.n, config.side, config.extent)


def cmd_multiplier(config: RunConfig) -> int:
    variant = _variant(config)
    scale = lambda_partition(config.j, config.sigma)
    grid = _kernel_grid(config, scale)
    field = multiplier_field(grid, PieceMultiplier(variant, scale, config.m),
                             {"variant": variant.tag, "j": config.j, "m": config.m})
    save_multiplier(config.out, field, config.resolved())
    print(f"✓ Multiplier P̂ ({variant.tag}, j={config.j}, m={config.m}) on side {grid.side} "
          f"written to {config.out}")
    return EXIT_OK


def cmd_caps(config: RunConfig) -> int:
    grid = cap_grid(config.j, config.n, config.seed)
    family = select_subsets(grid, config.sigma, config.c)
    write_json(config.out, {"config": config.resolved(), "cap_grid": grid.to_dict(),
                            "subsets": family.to_dict()})
    print(f"✓ {grid.size} caps, {family.L} subsets written to {config.out}")
    return EXIT_OK


def load_caps(path) -> CapGrid:
    return CapGrid.from_dict(read_json(path)["cap_grid"])


def load_subsets(path) -> SubsetFamily:
    return SubsetFamily.from_dict(read_json(path)["subsets"])


def _sibling(out: str, part: str, suffix: str) -> Path:
    path = Path(out)
    stem = path.name[:-len(path.suffix)] if path.suffix else path.name
    return path.with_name(f"{stem}.{part}{suffix}")


def cmd_kernel(config: RunConfig) -> int:
    variant = _variant(config)
    scale = lambda_partition(config.j, config.sigma)
    family = select_subsets(cap_grid(config.j, config.n, config.seed), config.sigma, config.c)
    grid = _kernel_grid(config, scale)
    split = materialize_kernels(variant, scale, config.m, family, config.ell, grid,
                                workers=_threads(config))
    resolved = config.resolved()
    summary = {"config": resolved, "caps": split.caps, "residual": split.residual(), "norms": {}}
    for part in ("P", "U", "V"):
        kernel = getattr(split, part)
        save_kernel(_sibling(config.out, part, ".bin"), kernel, resolved)
        save_radial_profile(_sibling(config.out, part, ".csv"), kernel, resolved)
        summary["norms"][part] = kernel.norms()
    write_json(_sibling(config.out, "summary", ".json"), summary)
    print(f"✓ P/U/V kernels (j={config.j}, m={config.m}, ℓ={config.ell}) written next to {config.out}")
    print(f"  max|U+V-P|/max|P| = {split.residual():.3e}")
    return EXIT_OK


def cmd_apply(config: RunConfig) -> int:
    grid = GridSpec(n=config.n, side=config.side or 256, extent=config.extent or 32.0)
    f = gaussian_field(grid)
    workers = _threads(config)
    meta: Dict[str, Any] = {"operator": config.operator, "input": "gaussian"}
    if config.operator == "bochner-riesz":
        out = bochner_riesz_apply(config.delta, f, workers)
        meta["delta"] = config.delta
    elif config.operator == "bochner-riesz-kernel":
        out = bochner_riesz_kernel_apply(config.delta, f, workers)
        meta["delta"] = config.delta
    else:
        result = i_alpha_apply(config.alpha, f, config.j_max, config.sigma, workers)
        out = result.function
        meta.update({"alpha": config.alpha, "j_max": config.j_max,
                     "tail_estimate": result.tail_estimate})
    meta["l2_norm"] = out.l2_norm()
    save_field(config.out, grid, out.values, meta, "physical", config.resolved())
    print(f"✓ {config.operator} applied on side {grid.side}; result written to {config.out}")
    return EXIT_OK


def _experiment_params(config: RunConfig) -> Dict[str, Any]:
    """Experiment keyword arguments from the flags that were given explicitly."""
    given = config.model_fields_set
    experiment = config.experiment
    params: Dict[str, Any] = {}
    if experiment in DEFAULT_J_RANGES:
        if config.j_range:
            params["j_values"] = parse_int_range(config.j_range)
        elif config.j is not None:
            params["j_values"] = [config.j]
    alpha_given = bool({"alpha_re", "alpha_im"} & given)
    beta_given = bool({"beta_re", "beta_im"} & given)
    if experiment is Experiment.KEY_OBSERVATION and "delta" in given:
        params["deltas"] = (config.delta,)
    elif experiment is Experiment.M_PLUS and alpha_given:
        params["alpha"] = config.alpha_re
    elif experiment is Experiment.LAMBDA:
        if alpha_given:
            params["alpha"] = config.alpha
        params.update({"r_max": config.r_max, "averaging": config.averaging})
    elif experiment is Experiment.PARTITION:
        if "n" in given:
            params["dims"] = (config.n,)
        if "samples" in given:
            params["samples"] = config.samples
    elif experiment is Experiment.GEOMETRY:
        params["samples"] = config.samples
    elif experiment is Experiment.UV_SPLIT and "variant" in given:
        params["variants"] = (config.variant,)
    elif experiment in (Experiment.LEMMA_ONE, Experiment.PROP_ONE, Experiment.PROP_TWO,
                        Experiment.REMARK32):
        if alpha_given:
            params["alpha"] = config.alpha
        if beta_given:
            params["beta"] = config.beta
    elif experiment is Experiment.OPERATOR:
        if "delta" in given:
            params["deltas"] = (config.delta,)
        if config.side:
            params["side"] = config.side
        if config.extent:
            params["extent"] = config.extent
    elif experiment is Experiment.SUBTRACTION and alpha_given:
        params["alphas"] = (config.alpha,)
    return params


def _experiment_config(config: RunConfig) -> ExperimentConfig:
    return ExperimentConfig(n=config.n, sigma=config.sigma, c=config.c, m=config.m,
                            ell=config.ell, seed=config.seed, samples=config.samples,
                            threads=_threads(config),
                            grid=GridConfig(side=config.side, extent=config.extent),
                            quadrature=QuadratureConfig(panels_per_unit=config.panels_per_unit,
                                                        gauss_order=config.gauss_order))


def cmd_verify(config: RunConfig) -> int:
    _banner(f"verify {config.experiment.value}")
    service = HarnessService(_experiment_config(config))
    reports = service.run(config.experiment, **_experiment_params(config))
    out = config.out or f"{config.experiment.value}.{'csv' if config.format is OutputFormat.CSV else 'json'}"
    resolved = config.resolved()
    if config.format is OutputFormat.CSV:
        rows = []
        for report in reports:
            rows.extend(report.rows() if hasattr(report, "slope") else
                        [dict(row, experiment=report.experiment) for row in report.rows])
        write_csv(out, rows_to_frame(rows), resolved)
    else:
        write_json(out, {"config": resolved, "reports": [r.to_report() for r in reports]})
    failed = [r.experiment for r in reports if not r.passed]
    for report in reports:
        mark = "✓" if report.passed else "✗"
        print(f"{mark} {report.experiment}")
    print(f"Report written to {out}")
    return EXIT_FAILED if failed else EXIT_OK


def cmd_report(config: RunConfig) -> int:
    rows = []
    for path in config.inputs:
        document = read_json(path)
        for report in document.get("reports", [document]):
            fit = report.get("fit") or {}
            rows.append({"file": str(path), "experiment": report.get("experiment", ""),
                         "pass": bool(report.get("pass", False)),
                         "slope": fit.get("slope"), "threshold": report.get("threshold"),
                         "max_residual": report.get("max_residual"),
                         "tolerance": report.get("tolerance")})
    frame = rows_to_frame(rows)
    if config.out:
        write_csv(config.out, frame, config.resolved())
        print(f"✓ Summary of {len(rows)} reports written to {config.out}")
    else:
        print(frame.to_string(index=False))
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAILED


COMMANDS: Dict[Command, Callable[[RunConfig], int]] = {
    Command.BESSEL: cmd_bessel,
    Command.MULTIPLIER: cmd_multiplier,
    Command.CAPS: cmd_caps,
    Command.KERNEL: cmd_kernel,
    Command.APPLY: cmd_apply,
    Command.VERIFY: cmd_verify,
    Command.REPORT: cmd_report,
}


def run(config: RunConfig) -> int:
    """Dispatch a validated config; returns the process exit code."""
    try:
        return COMMANDS[config.command](config)
    except (DomainError, ConfigError, InputError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BrlabError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILED


# =============================================================================
# Argument parsing
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brlab",
        description="Bochner–Riesz computational harmonic-analysis toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    %(prog)s bessel --order 0.5+1i --rho 1,10,40
    %(prog)s caps --n 2 --j 6 --out caps.json
    %(prog)s kernel --j 5 --variant sharp --out k.bin
    %(prog)s verify --experiment key-observation --delta 0.3
    %(prog)s report --out summary.csv lemma-one.json prop-one.json
        """
    )
    sub = parser.add_subparsers(dest="command", required=True)
    s = argparse.SUPPRESS

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=s, help="key=value config file (flags override it)")
    common.add_argument("--n", type=int, default=s, help="dimension (default: 2)")
    common.add_argument("--j", type=int, default=s, help="dyadic scale")
    common.add_argument("--j-range", default=s, help="sweep such as 4..8 or 4,5,7")
    common.add_argument("--sigma", type=float, default=s, help="σ (default: 0.1)")
    common.add_argument("--c", type=float, default=s, help="subset separation constant (default: 8)")
    common.add_argument("--alpha", default=s, help="α, complex literal allowed (e.g. 0.7+0.3i)")
    common.add_argument("--beta", default=s, help="β, complex literal allowed")
    common.add_argument("--delta", type=float, default=s, help="Bochner–Riesz order δ")
    common.add_argument("--m", type=int, default=s, help="radial cell index (default: 1)")
    common.add_argument("--ell", type=int, default=s, help="cap subset index (default: 1)")
    common.add_argument("--variant", default=s, help="standard, sharp, flat or analytic")
    common.add_argument("--z", type=float, default=s, help="analytic family parameter")
    common.add_argument("--side", type=int, default=s, help="grid side (power of two)")
    common.add_argument("--extent", type=float, default=s, help="grid half-width X")
    common.add_argument("--out", default=s, help="output path")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=s)
    common.add_argument("--seed", type=int, default=s)
    common.add_argument("--threads", type=int, default=s, help="worker cap (default: BRLAB_THREADS)")

    p = sub.add_parser(Command.BESSEL.value, parents=[common], help="evaluate J_ν(ρ)")
    p.add_argument("--order", default=s, help="ν, complex literal allowed")
    p.add_argument("--rho", default=s, help=f"comma-separated radii (default: {DEFAULT_RHO})")

    sub.add_parser(Command.MULTIPLIER.value, parents=[common], help="sample P̂_{j,m} on a frequency grid")
    sub.add_parser(Command.CAPS.value, parents=[common], help="build a cap grid and its Z_ℓ subsets")
    sub.add_parser(Command.KERNEL.value, parents=[common], help="materialize P, U and V kernels")

    p = sub.add_parser(Command.APPLY.value, parents=[common], help="apply an operator to a Gaussian")
    p.add_argument("--operator", default=s, help="bochner-riesz, bochner-riesz-kernel or i-alpha")
    p.add_argument("--j-max", type=int, default=s, help="last octave kept by i-alpha")

    p = sub.add_parser(Command.VERIFY.value, parents=[common], help="run a verification experiment")
    p.add_argument("--experiment", default=s, choices=[e.value for e in Experiment])
    p.add_argument("--samples", type=int, default=s)
    p.add_argument("--r-max", type=float, default=s)
    p.add_argument("--averaging", type=int, default=s)
    p.add_argument("--panels-per-unit", type=int, default=s, help="r-quadrature panels per unit (default: 16)")
    p.add_argument("--gauss-order", type=int, default=s, help="Gauss–Legendre points per panel (default: 8)")

    p = sub.add_parser(Command.REPORT.value, parents=[common], help="summarize report files")
    p.add_argument("inputs", nargs="*", default=s, help="report JSON files")
    return parser


def parse_config(argv: Optional[Sequence[str]] = None,
                 parser: Optional[argparse.ArgumentParser] = None) -> RunConfig:
    parser = parser or build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    return build_run_config(command, args, config_path)


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    parser = build_parser()
    try:
        config = parse_config(argv, parser)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    except ValidationError as e:
        messages = "; ".join(err["msg"].removeprefix("Value error, ") for err in e.errors())
        print(f"Error: {messages}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DomainError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
