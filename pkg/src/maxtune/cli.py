"""Command-line front end.

Subcommands: identify, analyze, run, compare, oracle.
Exit codes: 0 success, 1 configuration error, 2 runtime error (divergence
guard, I/O).
"""

import argparse
import sys

from . import harness, sysid
from .errors import ConfigurationError, DivergenceError, IdentifiabilityError
from .harness import ExperimentConfig


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract reserves 2 for runtime errors
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigurationError(message)


def _parse_value(raw: str):
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def load_config_file(path: str) -> dict:
    """Flat key=value text; '#' starts a comment.  Keys match the CLI flags
    (dashes and underscores are interchangeable)."""
    values = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigurationError(
                        f"{path}:{lineno}: expected key=value, got {line!r}"
                    )
                key, raw = line.split("=", 1)
                values[key.strip().replace("-", "_")] = _parse_value(raw.strip())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    return values


def _add_experiment_flags(p: _Parser) -> None:
    p.add_argument("--config", help="flat key=value config file; flags override it")
    p.add_argument("--controller", choices=harness.CONTROLLERS, default="prop")
    p.add_argument("--reference", type=float, default=20.0, help="target response time, seconds")
    p.add_argument("--duration", type=float, default=3600.0)
    p.add_argument("--interval", type=float, default=180.0, dest="measurement_interval")
    p.add_argument("--window", type=float, default=60.0, dest="sampling_window")
    p.add_argument("--mean-interarrival", type=float, default=0.2)
    p.add_argument("--mean-service", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--initial-max-requests", type=int, default=200)
    p.add_argument("--u0", type=int, default=300)
    p.add_argument("--kp", type=float, default=-1.5)
    p.add_argument("--ge", type=float, default=None)
    p.add_argument("--gu", type=float, default=0.05)
    p.add_argument("--u-fixed", type=int, default=300)
    p.add_argument("--u-min", type=int, default=1)
    p.add_argument("--u-max", type=int, default=10_000)


def _experiment_config(args, controller=None) -> ExperimentConfig:
    cfg = ExperimentConfig(
        controller=controller or args.controller,
        reference=args.reference,
        duration=args.duration,
        measurement_interval=args.measurement_interval,
        sampling_window=args.sampling_window,
        mean_interarrival=args.mean_interarrival,
        mean_service=args.mean_service,
        seed=args.seed,
        initial_max_requests=args.initial_max_requests,
        kp=args.kp,
        u0=args.u0,
        ge=args.ge,
        gu=args.gu,
        u_fixed=args.u_fixed,
        u_min=args.u_min,
        u_max=args.u_max,
    )
    cfg.validate()
    return cfg


def build_parser() -> _Parser:
    parser = _Parser(prog="maxtune")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one closed-loop experiment, CSV out")
    _add_experiment_flags(p_run)
    p_run.add_argument("--out", required=True, help="CSV output path")
    p_run.add_argument("--plot", help="optional SVG plot path")

    p_cmp = sub.add_parser("compare", help="proportional vs fuzzy on one workload")
    _add_experiment_flags(p_cmp)
    p_cmp.add_argument("--out-prop", help="CSV path for the proportional run")
    p_cmp.add_argument("--out-fuzzy", help="CSV path for the fuzzy run")

    p_id = sub.add_parser("identify", help="step experiment + least-squares fit")
    _add_experiment_flags(p_id)
    p_id.add_argument("--u-start", type=int, default=200)
    p_id.add_argument("--u-step", type=int, default=10)
    p_id.add_argument("--n-intervals", type=int, default=20)

    p_an = sub.add_parser("analyze", help="pole and stable gain interval of a model")
    p_an.add_argument("--a", type=float, default=0.1)
    p_an.add_argument("--b", type=float, default=-0.36)
    p_an.add_argument("--kp", type=float, default=-1.5)

    p_or = sub.add_parser("oracle", help="analytic M/M/c mean queue wait")
    p_or.add_argument("--arrival-rate", type=float, required=True, help="arrivals/second")
    p_or.add_argument("--service-rate", type=float, required=True, help="services/second per worker")
    p_or.add_argument("--workers", type=int, required=True)
    return parser


def _parse_args(argv):
    parser = build_parser()
    # first pass just to locate --config, then re-parse with its values as defaults
    args = parser.parse_args(argv)
    config_path = getattr(args, "config", None)
    if config_path:
        overrides = load_config_file(config_path)
        known = set(vars(args))
        bad = set(overrides) - known
        if bad:
            raise ConfigurationError(f"unknown config keys: {sorted(bad)}")
        parser = build_parser()
        for p in parser._subparsers._group_actions[0].choices.values():
            p.set_defaults(**overrides)
        args = parser.parse_args(argv)
    return args


def cmd_run(args) -> int:
    cfg = _experiment_config(args)
    report = harness.run_experiment(cfg)
    harness.emit_csv(report, args.out)
    if args.plot:
        harness.plot_report(report, args.plot)
    s = report.summary
    print(f"wrote {args.out}")
    print(f"final-half mean response: {s.final_half_mean_response:.3f} s "
          f"(reference {cfg.reference:g} s)")
    print(f"final-half mean max_requests: {s.final_half_mean_max_requests:.1f}")
    print(f"rms error: {s.rms_error:.3f} s, converged: {s.converged}")
    return 0


def cmd_compare(args) -> int:
    cfg_prop = _experiment_config(args, controller="prop")
    cfg_fuzzy = _experiment_config(args, controller="fuzzy")
    result = harness.compare(cfg_prop, cfg_fuzzy)
    if args.out_prop:
        harness.emit_csv(result.prop, args.out_prop)
    if args.out_fuzzy:
        harness.emit_csv(result.fuzzy, args.out_fuzzy)
    for label, rep in (("prop", result.prop), ("fuzzy", result.fuzzy)):
        s = rep.summary
        print(f"{label}: final-half mean response {s.final_half_mean_response:.3f} s, "
              f"final-half mean max_requests {s.final_half_mean_max_requests:.1f}, "
              f"rms error {s.rms_error:.3f} s, converged {s.converged}")
    print(f"efficiency delta (prop - fuzzy mean max_requests): "
          f"{result.efficiency_delta:+.1f}")
    return 0


def cmd_identify(args) -> int:
    cfg = _experiment_config(args)
    probe = harness.QueueStepProbe(cfg)
    data = sysid.run_step_experiment(probe, args.u_start, args.u_step,
                                     args.n_intervals)
    model = sysid.fit_arx(data)
    report = sysid.stable_gain_interval(model)
    print(f"a={model.a:.6f}")
    print(f"b={model.b:.6f}")
    print(f"residual_rms={model.residual_rms:.6f}")
    print(f"kp_min={report.kp_min:.6f}")
    print(f"kp_max={report.kp_max:.6f}")
    return 0


def cmd_analyze(args) -> int:
    model = sysid.ArxModel(a=args.a, b=args.b, y0=0.0, u0=0.0, residual_rms=0.0)
    report = sysid.stable_gain_interval(model, kp=args.kp)
    print(f"a={model.a:.6f}")
    print(f"b={model.b:.6f}")
    print(f"pole={report.pole:.6f}")
    print(f"stable={str(report.stable).lower()}")
    print(f"kp_min={report.kp_min:.6f}")
    print(f"kp_max={report.kp_max:.6f}")
    return 0


def cmd_oracle(args) -> int:
    wait = harness.erlang_c_wait(args.arrival_rate, args.service_rate, args.workers)
    print(f"mean_queue_wait_sec={wait:.6f}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "identify": cmd_identify,
    "analyze": cmd_analyze,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    try:
        args = _parse_args(argv if argv is not None else sys.argv[1:])
        return COMMANDS[args.command](args)
    except (ConfigurationError, IdentifiabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DivergenceError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
