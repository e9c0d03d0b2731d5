"""
Command line front end.

Tables go to standard output (or ``--out``), diagnostics and logs to standard error. Exit status: 0 success,
1 usage error, 2 domain or physicality error, 3 no key / no root where a value was demanded.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

from cvmdips import __version__
from cvmdips.constants import DEFAULT_TRUNCATION_TOL, DEFAULT_VALIDATION_TOL, LOG_FORMAT, ExitCode, Layout, \
    OutputFormat, TpsRule
from cvmdips.data import RATE_FIELDS, ProtocolConfig, RunConfig
from cvmdips.errors import CvmdipsError, UsageError
from cvmdips.figures import PRESETS, get_preset
from cvmdips.fock import validate_grid
from cvmdips.keyrate import plob_bound, secret_key_rate
from cvmdips.outputs import StudyResult
from cvmdips.studies import (AXIS_NAMES, Axis, SweepSpec, crossover, eta_crossover, eta_threshold, max_distance,
                             optimal_variance, optimize_tps, resolve_tps, sweep)

log = logging.getLogger(__name__)

# flag dest -> RunConfig keys it sets
_CONFIG_FLAGS = {
    "V": ("V",), "k": ("k",), "T_PS": ("T_PS",), "L": ("L",), "layout": ("layout",), "loss_coeff": ("loss_coeff",),
    "eps": ("eps_A", "eps_B"), "eps_A": ("eps_A",), "eps_B": ("eps_B",), "eta": ("eta",), "v_el": ("v_el",),
    "beta": ("beta",), "tol_km": ("tol_km",), "tol_eta": ("tol_eta",), "V_min": ("V_min",), "V_max": ("V_max",),
}


class _ArgumentParser(argparse.ArgumentParser):
    """ argparse with usage errors mapped to the usage exit status """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE, f"{self.prog}: error: {message}\n")


def _output_parser() -> argparse.ArgumentParser:
    output = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    io = output.add_argument_group("output")
    io.add_argument("--format", choices=[f.value for f in OutputFormat], help="output format (default: csv)")
    io.add_argument("--out", metavar="PATH", help="write the table here instead of standard output")
    io.add_argument("--jobs", type=int, help="worker processes for sweeps; 0 = one per physical core (default: 1)")
    io.add_argument("--log-level", dest="log_level",
                    help="logging level name or number, or true/false for INFO/WARNING (default: WARNING)")
    return output


def _common_parser(output: argparse.ArgumentParser) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS, parents=[output])
    common.add_argument("--config", metavar="PATH", help="flat JSON object of configuration keys")

    params = common.add_argument_group("protocol parameters")
    params.add_argument("--V", type=float, help="EPR variance V_A = V_B, in SNU")
    params.add_argument("--k", type=int, help="photons subtracted")
    params.add_argument("--T_PS", "--T-PS", dest="T_PS",
                        help=f"tap transmittance, or a rule: {', '.join(r.value for r in TpsRule)}")
    params.add_argument("--L", type=float, help="total Alice-Bob distance, in km")
    params.add_argument("--mode", dest="layout", choices=[m.value for m in Layout] + ["extreme-asymmetric"],
                        help="relay placement")
    params.add_argument("--loss", dest="loss_coeff", type=float, help="fiber loss, in dB/km")
    params.add_argument("--eps", type=float, help="excess noise on both links, in SNU")
    params.add_argument("--eps-A", dest="eps_A", type=float, help="excess noise on Alice's link")
    params.add_argument("--eps-B", dest="eps_B", type=float, help="excess noise on Bob's link")
    params.add_argument("--eta", type=float, help="homodyne detector efficiency")
    params.add_argument("--v-el", dest="v_el", type=float, help="electronic noise, in SNU")
    params.add_argument("--beta", type=float, help="reconciliation efficiency")
    return common


def build_parser() -> argparse.ArgumentParser:
    output = _output_parser()
    common = _common_parser(output)
    parser = _ArgumentParser(prog="cvmdips", description="Secret key rates of CV-MDI-QKD with photon subtraction")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    commands.add_parser("rate", parents=[common], help="key rate at one operating point")

    p_sweep = commands.add_parser("sweep", parents=[common], help="key rate over one or two parameter grids")
    for suffix, required in (("", True), ("2", False)):
        p_sweep.add_argument(f"--axis{suffix}", choices=AXIS_NAMES, required=required)
        grid = p_sweep.add_mutually_exclusive_group(required=required)
        grid.add_argument(f"--range{suffix}", nargs=3, type=float, metavar=("START", "STOP", "STEPS"))
        grid.add_argument(f"--values{suffix}", nargs="+", type=float, metavar="X")
    p_sweep.add_argument("--outputs", nargs="+", choices=RATE_FIELDS, default=["K_raw", "K"])

    p_fig = commands.add_parser("figure", parents=[output], help="tables behind the published figures")
    p_fig.add_argument("name", choices=list(PRESETS))
    p_fig.add_argument("--signed", action="store_true", help="tabulate K_raw instead of K")

    p_opt = commands.add_parser("optimize", help="optimizers and threshold searches")
    targets = p_opt.add_subparsers(dest="target", required=True, metavar="TARGET")
    for name, help_text in (("max-distance", "largest distance with a positive key"),
                            ("variance", "EPR variance maximizing the key rate"),
                            ("tps", "tap transmittance by a rule"),
                            ("eta-threshold", "smallest detector efficiency with a positive key"),
                            ("crossover", "distance where two photon numbers swap order"),
                            ("eta-crossover", "detector efficiency where two photon numbers swap order")):
        target = targets.add_parser(name, parents=[common], help=help_text)
        target.add_argument("--tol-km", dest="tol_km", type=float, default=argparse.SUPPRESS)
        target.add_argument("--tol-eta", dest="tol_eta", type=float, default=argparse.SUPPRESS)
        target.add_argument("--V-min", dest="V_min", type=float, default=argparse.SUPPRESS)
        target.add_argument("--V-max", dest="V_max", type=float, default=argparse.SUPPRESS)
        target.add_argument("--rule", choices=[r.value for r in TpsRule], default=TpsRule.OPTIMAL.value,
                            help="T_PS rule (tps target)")
        target.add_argument("--k-a", dest="k_a", type=int, default=1, help="photon number of the first curve")
        target.add_argument("--k-b", dest="k_b", type=int, default=0, help="photon number of the second curve")

    p_val = commands.add_parser("validate", parents=[output], help="compare the closed forms with the Fock oracle")
    p_val.add_argument("--tol", type=float, default=DEFAULT_VALIDATION_TOL, help="relative comparison tolerance")
    p_val.add_argument("--truncation-tol", dest="truncation_tol", type=float, default=DEFAULT_TRUNCATION_TOL,
                       help="bound on the probability mass dropped by the Fock truncation")
    return parser


def _resolve_level(level: int | str | bool | None) -> int | str:
    if level is None:
        return logging.WARNING
    if isinstance(level, str):
        lowered = level.strip().lower()
        if lowered in ("true", "false"):
            level = lowered == "true"
        elif lowered.isdigit():
            level = int(lowered)
        else:
            level = level.upper()
    if level is True:
        return logging.INFO
    elif level is False:
        return logging.WARNING
    return level


def configure_logging(level: int | str | bool | None):
    logging.basicConfig(format=LOG_FORMAT, handlers=[logging.StreamHandler(sys.stderr)])
    try:
        logging.getLogger("cvmdips").setLevel(_resolve_level(level))
    except (TypeError, ValueError) as e:
        raise UsageError(f"Unknown log level {level!r}") from e


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """ Defaults, then the JSON file, then flags """
    run_config = RunConfig()
    path = getattr(args, "config", None)
    if path is not None:
        try:
            values = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"Cannot read config file {path}: {e}") from e
        if not isinstance(values, dict):
            raise UsageError(f"Config file {path} must hold a flat JSON object")
        run_config.layer(values, "file")
    flags = {}
    for dest, keys in _CONFIG_FLAGS.items():
        if dest in args:
            flags.update({key: getattr(args, dest) for key in keys})
    run_config.layer(flags, "flag")
    for line in (f"{k} = {v}" for k, v in run_config.describe().items()):
        log.info(line)
    return run_config


def _metadata(run_config: RunConfig, cfg: ProtocolConfig | None = None) -> dict[str, Any]:
    meta = dict(run_config.describe())
    if cfg is not None:
        meta["T_PS (resolved)"] = cfg.source.T_PS
    return meta


def _cmd_rate(args, run_config: RunConfig) -> tuple[StudyResult, int]:
    cfg = run_config.to_protocol()
    report = secret_key_rate(cfg)
    row = (cfg.source.V, cfg.source.k, cfg.source.T_PS, cfg.link.L_AC, cfg.link.L_BC,
           *(report.get(name) for name in RATE_FIELDS), plob_bound(cfg.L_AB, cfg.link.loss_coeff))
    columns = ["V", "k", "T_PS", "L_AC", "L_BC", *RATE_FIELDS, "PLOB"]
    return StudyResult(columns, [row], _metadata(run_config, cfg)), ExitCode.OK


def _axis(name: str, grid_range, values) -> Axis:
    if grid_range is not None:
        start, stop, steps = grid_range
        if not float(steps).is_integer():
            raise UsageError(f"STEPS must be an integer, got {steps}")
        return Axis.from_range(name, start, stop, int(steps))
    return Axis(name, tuple(values))


def _cmd_sweep(args, run_config: RunConfig) -> tuple[StudyResult, int]:
    cfg = run_config.to_protocol()
    axis1 = _axis(args.axis, args.range, args.values)
    axis2 = None
    if args.axis2 is not None:
        axis2 = _axis(args.axis2, args.range2, args.values2)
    elif args.range2 is not None or args.values2 is not None:
        raise UsageError("--range2/--values2 need --axis2")
    spec = SweepSpec(base=cfg, axis1=axis1, axis2=axis2, outputs=tuple(args.outputs),
                     tps_rule=run_config.tps_rule, metadata=_metadata(run_config, cfg))
    return sweep(spec, jobs=getattr(args, "jobs", 1)), ExitCode.OK


def _cmd_figure(args, run_config: RunConfig) -> tuple[StudyResult, int]:
    preset = get_preset(args.name)
    return preset.run(signed=args.signed, jobs=getattr(args, "jobs", 1)), ExitCode.OK


def _with_k(cfg: ProtocolConfig, k: int, rule: TpsRule | None) -> ProtocolConfig:
    """ Same operating point with another photon number; an explicit T_PS only applies with subtraction """
    t = 1.0 if k == 0 or rule is not None else cfg.source.T_PS
    return resolve_tps(replace(cfg, source=replace(cfg.source, k=k, T_PS=t)), rule)


def _cmd_optimize(args, run_config: RunConfig) -> tuple[StudyResult, int]:
    target = args.target
    layout = run_config.layout
    rule = run_config.tps_rule
    cfg = run_config.to_protocol()
    meta = _metadata(run_config, cfg)

    if target == "tps":
        values = optimize_tps(cfg, TpsRule(args.rule))
        meta["T_PS (resolved)"] = values["T_PS"]
        return StudyResult(["rule", *values], [(args.rule, *values.values())], meta), ExitCode.OK
    if target == "max-distance":
        value = max_distance(cfg, layout, run_config["tol_km"], tps_rule=rule)
        return StudyResult(["layout", "k", "L_max_km"], [(layout.value, cfg.source.k, value)], meta), ExitCode.OK
    if target == "variance":
        V_star, K_star = optimal_variance(cfg, (run_config["V_min"], run_config["V_max"]), tps_rule=rule)
        return StudyResult(["V_star", "K_star"], [(V_star, K_star)], meta), ExitCode.OK
    if target == "eta-threshold":
        value = eta_threshold(cfg, run_config["tol_eta"])
        return StudyResult(["k", "eta_min"], [(cfg.source.k, value)], meta), ExitCode.OK

    cfg_a, cfg_b = _with_k(cfg, args.k_a, rule), _with_k(cfg, args.k_b, rule)
    if target == "crossover":
        value = crossover(cfg_a, cfg_b, layout, run_config["tol_km"], tps_rule=rule)
        column = "L_cross_km"
    else:
        value = eta_crossover(cfg_a, cfg_b, run_config["tol_eta"])
        column = "eta_cross"
    if value is None:
        log.error(f"No crossover between k={args.k_a} and k={args.k_b}")
    status = ExitCode.OK if value is not None else ExitCode.NO_RESULT
    return StudyResult(["k_a", "k_b", column], [(args.k_a, args.k_b, value)], meta), status


def _cmd_validate(args, run_config: RunConfig) -> tuple[StudyResult, int]:
    reports = validate_grid(tol=args.tol, truncation_tol=args.truncation_tol, jobs=getattr(args, "jobs", 1))
    columns = ["V", "T_PS", "k", "err_P", "err_X", "err_Y", "err_Z", "pass"]
    rows = [(r.V, r.T_PS, r.k, r.err_P, r.err_X, r.err_Y, r.err_Z, r.passed) for r in reports]
    meta = {"tol": args.tol, "truncation_tol": args.truncation_tol}
    passed = all(r.passed for r in reports)
    if not passed:
        log.error(f"{sum(not r.passed for r in reports)} of {len(reports)} points failed")
    return StudyResult(columns, rows, meta), ExitCode.OK if passed else ExitCode.DOMAIN


_COMMANDS = {"rate": _cmd_rate, "sweep": _cmd_sweep, "figure": _cmd_figure, "optimize": _cmd_optimize,
             "validate": _cmd_validate}


def _write(result: StudyResult, args: argparse.Namespace):
    fmt = OutputFormat(getattr(args, "format", OutputFormat.CSV.value))
    out = getattr(args, "out", None)
    if out is None:
        result.write(sys.stdout, fmt)
    else:
        with open(out, "w", newline="") as stream:
            result.write(stream, fmt)


def run(argv: Sequence[str] | None = None) -> int:
    """
    Parse `argv`, execute the command and write its table.

    :return: The process exit status
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else ExitCode.USAGE

    try:
        configure_logging(getattr(args, "log_level", None))
        run_config = load_run_config(args)
        result, status = _COMMANDS[args.command](args, run_config)
        _write(result, args)
    except CvmdipsError as e:
        print(f"cvmdips: error: {e}", file=sys.stderr)
        return int(e.exit_code)
    except OSError as e:
        print(f"cvmdips: error: {e}", file=sys.stderr)
        return ExitCode.USAGE
    return int(status)


def main():
    sys.exit(run())
