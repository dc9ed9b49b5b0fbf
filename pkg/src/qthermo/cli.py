"""Command-line front end.

    qthermo figure fig5 -o fig5.csv
    qthermo sweep --quantity mu --axis s --start 0 --stop 1 --steps 51 --set omega=10
    qthermo eval --t1 8 --t2 10 --omega 10 --eta 0.5 --s 0.5
    qthermo selftest

Every CSV gets a ``<output>.meta.json`` sidecar with the full parameter set.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path

from . import __version__
from .model import DomainError
from .sweeps import (
    AXES,
    DEFAULT_CONVENTIONS,
    DEFAULT_PARAMS,
    FIGURES,
    QUANTITIES,
    PointError,
    SweepSpec,
    Table,
    figure_table,
    run_sweep,
)

EXIT_NUMERIC = 1
EXIT_USAGE = 2


def fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".12g")


def write_table(table: Table, output: str, argv: list[str]) -> None:
    if output == "-":
        out = sys.stdout
        _write_csv(table, out)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        _write_csv(table, fh)
    meta = dict(table.meta, columns=table.columns, command=argv)
    meta_path = path.with_name(path.name + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _write_csv(table: Table, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([fmt(x) for x in row])


def load_config(path: str) -> dict:
    text = Path(path).read_text()
    if path.endswith((".yaml", ".yml")):
        import yaml

        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise DomainError(f"config {path} must hold a mapping")
    return data


def _parse_set(items: list[str]) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise DomainError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = float(value)
    return out


def _add_conventions(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("conventions")
    g.add_argument("--mu-convention", choices=["resource", "literal"])
    g.add_argument("--beta-exponent", choices=["negative", "literal"])
    g.add_argument("--f21-series", choices=["gauss", "literal"])
    g.add_argument("--gamma-convention", choices=["consistent", "literal"])


def _conventions(args, config: dict) -> dict:
    conv = {}
    for key in DEFAULT_CONVENTIONS:
        value = getattr(args, key, None) or config.get(key)
        if value is not None:
            conv[key] = value
    return conv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qthermo", description=__doc__.split("\n")[0] or None)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    f = sub.add_parser("figure", help="regenerate the data behind one figure")
    f.add_argument("name", choices=sorted(FIGURES))
    f.add_argument("-o", "--output", help="CSV path ('-' for stdout; default <name>.csv)")
    f.add_argument("--steps", type=int)
    f.add_argument("--t", type=float, help="temperature for fig2/fig3")
    f.add_argument("--t2", type=float, help="second temperature for fig7")
    f.add_argument("--etas", type=float, nargs="+")
    f.add_argument("--k-max", type=int, help="finite HG basis for fig7 (default: full basis)")
    f.add_argument("--t-range", type=float, nargs=2, help="temperature range for fig4")
    f.add_argument("--pairs", type=float, nargs="+", help="t1 t2 [t1 t2 ...] for fig8")
    f.add_argument("--jobs", type=int, default=1)
    _add_conventions(f)

    s = sub.add_parser("sweep", help="sweep one quantity along one parameter")
    s.add_argument("--config", help="JSON or YAML file with sweep keys")
    s.add_argument("--quantity", choices=QUANTITIES)
    s.add_argument("--axis", choices=AXES)
    s.add_argument("--start", type=float)
    s.add_argument("--stop", type=float)
    s.add_argument("--steps", type=int)
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="fixed parameter")
    s.add_argument("--k-max", type=int)
    s.add_argument("--which", type=int, choices=[1, 2])
    s.add_argument("--nu", type=float)
    s.add_argument("-o", "--output")
    s.add_argument("--jobs", type=int, default=1)
    _add_conventions(s)

    e = sub.add_parser("eval", help="evaluate every quantity at one point (JSON)")
    e.add_argument("--config")
    for key in AXES:
        e.add_argument(f"--{key}", type=float)
    e.add_argument("--nu", type=float, default=1.0)
    _add_conventions(e)

    sub.add_parser("selftest", help="run the oracle-equivalence checks")
    return parser


def _figure(args, argv):
    opts = {"conv": _conventions(args, {})}
    for key in ("steps", "t", "t2", "etas", "k_max"):
        value = getattr(args, key)
        if value is not None:
            opts[key] = value
    if args.t_range:
        opts["t_range"] = tuple(args.t_range)
    if args.pairs:
        if len(args.pairs) % 2:
            raise DomainError("--pairs needs an even number of temperatures")
        opts["pairs"] = list(zip(args.pairs[::2], args.pairs[1::2]))
    table = figure_table(args.name, opts, args.jobs)
    write_table(table, args.output or f"{args.name}.csv", argv)


def _sweep(args, argv):
    config = load_config(args.config) if args.config else {}
    fixed = {k: float(v) for k, v in config.get("fixed", {}).items()}
    fixed.update({k: float(config[k]) for k in AXES if k in config})
    fixed.update(_parse_set(args.set))

    def pick(name, default=None):
        value = getattr(args, name)
        return value if value is not None else config.get(name, default)

    quantity, axis = pick("quantity"), pick("axis")
    if quantity is None or axis is None:
        raise DomainError("sweep needs --quantity and --axis (or config keys)")
    fixed.pop(axis, None)
    for key in ("start", "stop"):
        if pick(key) is None:
            raise DomainError(f"sweep needs --{key}")
    spec = SweepSpec(
        quantity=quantity,
        axis=axis,
        start=float(pick("start")),
        stop=float(pick("stop")),
        steps=int(pick("steps", 51)),
        fixed=fixed,
        conventions=_conventions(args, config),
        k_max=pick("k_max"),
        which=int(pick("which", 1)),
        nu=float(pick("nu", 1.0)),
    )
    spec.validate()
    table = run_sweep(spec, args.jobs)
    write_table(table, pick("output") or f"{quantity}_{axis}.csv", argv)


def _weak_commutation_or_none(pair, geom):
    from .gaussian_fisher import weak_commutation
    from .model import SingularityError

    try:
        return abs(weak_commutation(pair, geom))
    except SingularityError:
        return None


def _eval(args):
    from .counting import counting_fi_matrix
    from .demux import hg_sensitivity_full
    from .equal_temp import qfi_equal
    from .estimation import compare_strategies, inverse_mu
    from .gaussian_fisher import qfi_matrix
    from .model import DiffractionGeometry, SourcePair, build_image_state, derive_params

    config = load_config(args.config) if args.config else {}
    params = {k: config[k] for k in AXES if k in config}
    params.update({k: getattr(args, k) for k in AXES if getattr(args, k) is not None})
    if "d" in params or "varpi" in params:
        base = {k: v for k, v in DEFAULT_PARAMS.items() if k != "s"}
    else:
        base = dict(DEFAULT_PARAMS)
    params = {**base, **params}
    conv = {**DEFAULT_CONVENTIONS, **_conventions(args, config)}
    pair = SourcePair(params["t1"], params["t2"], params["omega"], params["eta"], conv["gamma_convention"])
    geom = DiffractionGeometry(params.get("s"), params.get("d"), params.get("varpi"))
    s = geom.s
    p = derive_params(pair)
    state = build_image_state(pair, geom)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        h = qfi_matrix(pair, geom)
        cmp = compare_strategies(h, args.nu)
        fc = counting_fi_matrix(pair, geom, series=conv["f21_series"])
    out = {
        "params": {**params, "s": s},
        "conventions": conv,
        "derived": {"chi1": p.chi1, "chi2": p.chi2, "gamma": p.gamma, "n_total": p.n_total,
                    "n_plus": state.n_plus, "n_minus": state.n_minus},
        "qfi_equal_t1": qfi_equal(pair.t1, pair.omega, pair.eta, s).qfi,
        "qfi_matrix": {"h11": h.h11, "h22": h.h22, "h12": h.h12, "path": h.path},
        "weak_commutation": _weak_commutation_or_none(pair, geom),
        "sim_bound": cmp.sim_bound,
        "ind_bound": cmp.ind_bound,
        "mu": cmp.mu,
        "inv_mu": inverse_mu(h, conv["mu_convention"]),
        "hg_full": {"M1": hg_sensitivity_full(pair, geom, 1), "M2": hg_sensitivity_full(pair, geom, 2)},
        "counting_fi": {"f11": fc.h11, "f22": fc.h22, "f12": fc.h12},
    }
    json.dump(out, sys.stdout, indent=2, sort_keys=True, default=lambda x: None)
    sys.stdout.write("\n")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "figure":
            _figure(args, argv)
        elif args.command == "sweep":
            _sweep(args, argv)
        elif args.command == "eval":
            _eval(args)
        elif args.command == "selftest":
            from .selftest import run

            return 0 if run() else EXIT_NUMERIC
    except DomainError as exc:
        parser.print_usage(sys.stderr)
        print(f"qthermo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PointError, ArithmeticError, FloatingPointError) as exc:
        print(f"qthermo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
