"""Command-line entry point: ``qchaos <subcommand> [flags]``.

Exit codes: 0 success, 2 validation error, 3 resource limit, 4 oracle mismatch.
CSV floats carry 17 significant digits; JSON floats use Python's shortest
round-trip representation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import contextmanager

from qchaos import boson_game as bg
from qchaos import exact_oracle as oracle
from qchaos import fermion_game as fg
from qchaos import measure_lab as ml
from qchaos.errors import InvalidConfig, OracleMismatch, ResourceLimit
from qchaos.ifs_core import ClassicalConfig, VertexSet, run_game, vertex_stream

FERMION_DELTA_TOL = 1e-10
FERMION_A0_TOL = 1e-12
BOSON_DELTA_TOL = 1e-6
BOSON_PURITY_TOL = 1e-6

NAMED_W = {"wc": ml.W_C, "golden": ml.W_GOLDEN}


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_w(text: str) -> float:
    text = str(text).strip()
    if text in NAMED_W:
        return NAMED_W[text]
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"w must be a number or one of {sorted(NAMED_W)}") from None


def parse_betas(text: str) -> tuple[complex, ...]:
    presets = {
        "roots3": lambda: bg.roots_of_unity(3),
        "roots3-shifted": lambda: bg.roots_of_unity(3, shift=2 + 2j),
    }
    if text in presets:
        return presets[text]()
    try:
        return tuple(complex(t.replace(" ", "")) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"betas must be {sorted(presets)} or comma-separated complex numbers like 1+0.5j"
        ) from None


def parse_angle(text: str) -> bg.Angle:
    try:
        return bg.Angle.parse(text)
    except InvalidConfig as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def open_weight(text: str) -> float:
    w = parse_w(text)
    if not 0.0 < w < 1.0:
        raise argparse.ArgumentTypeError(f"w must lie in (0, 1), got {w}")
    return w


@contextmanager
def output(path: str):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def write_csv(path: str, header, rows) -> None:
    with output(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path: str, obj) -> None:
    with output(path) as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def cmd_classical(args) -> int:
    vertices = VertexSet.interval() if args.dim == 1 else VertexSet.regular_polygon(args.M)
    x0 = (args.x0, 0.0) if args.dim == 1 else (args.x0, args.y0)
    cfg = ClassicalConfig(vertices=vertices, w=args.w, x0=x0, seed=args.seed, stream=args.stream)
    traj = run_game(cfg, args.steps)
    rows = ((k, int(traj.gammas[k]), fmt(traj.values[k, 0]), fmt(traj.values[k, 1]))
            for k in range(1, len(traj)))
    write_csv(args.out, ["n", "gamma", "x", "y"], rows)
    return 0


def cmd_fermion(args) -> int:
    cfg = fg.QuantumConfig(omega=args.omega.rad, lam=args.lam.rad, tau=args.tau,
                           seed=args.seed, stream=args.stream)
    traj = fg.run_fermion(cfg, args.steps)
    S = fg.entropy(traj.values)
    rows = ((k, int(traj.gammas[k]), fmt(traj.values[k]), fmt(S[k])) for k in range(1, len(traj)))
    write_csv(args.out, ["n", "gamma", "N", "S"], rows)
    return 0


def _grid_rows(grid: ml.DensityGrid):
    e = grid.edges
    return ((fmt(e[j]), fmt(e[j + 1]), fmt(grid.masses[j])) for j in range(grid.K))


def cmd_density(args) -> int:
    w, K = args.w, args.K
    if args.mode in ("simulate", "iterate", "moments", "alpha", "entropy") and not 0.0 < w < 1.0:
        raise InvalidConfig(f"w must lie in (0, 1), got {w}")
    if args.mode == "simulate":
        grid = ml.simulate_histogram(w, args.steps, K, burn_in=args.burn_in, seed=args.seed,
                                     stream=args.stream, shards=args.shards, threads=args.threads)
        write_csv(args.out, ["bin_left", "bin_right", "mass"], _grid_rows(grid))
    elif args.mode == "iterate":
        if args.iterations is not None:
            grid = ml.DensityGrid.uniform(K)
            for _ in range(args.iterations):
                grid = ml.iterate_density(grid, w)
        else:
            grid = ml.stationary_density(w, K, tol=args.tol, max_iter=args.max_iter)
            if not grid.converged:
                print(f"warning: not converged after {grid.iterations} iterations "
                      f"(last L1 change {grid.l1_change:.3e})", file=sys.stderr)
        write_csv(args.out, ["bin_left", "bin_right", "mass"], _grid_rows(grid))
    elif args.mode == "closed-form":
        grid = ml.closed_form_density(w, K)
        write_csv(args.out, ["bin_left", "bin_right", "mass"], _grid_rows(grid))
    elif args.mode == "moments":
        table = ml.moment_table(w, K)
        write_csv(args.out, ["n", "moment"], ((n, fmt(m)) for n, m in enumerate(table.moments)))
    elif args.mode == "alpha":
        write_json(args.out, {"w": w, "alpha": ml.small_x_exponent(w)})
    elif args.mode == "entropy":
        bounds = ml.entropy_truncation(w, K)
        est = ml.average_entropy_mc(w, args.steps, burn_in=args.burn_in, seed=args.seed,
                                    stream=args.stream, shards=args.shards, threads=args.threads)
        write_json(args.out, {"w": w, "K": K, "A_K": bounds.A_K, "B_K": bounds.B_K, "C_K": bounds.C_K,
                              "mc_estimate": est.mean, "mc_stderr": est.stderr})
    return 0


def _boson_cfg(args) -> bg.BosonConfig:
    return bg.BosonConfig(Omega=args.omega, Lambda=args.lam, betas=args.betas, chi0=complex(args.chi0),
                          seed=args.seed, stream=args.stream)


def cmd_boson(args) -> int:
    cfg = _boson_cfg(args)
    traj = bg.run_boson(cfg, args.steps)
    z = traj.values
    rows = ((k, int(traj.gammas[k]), fmt(z[k].real), fmt(z[k].imag)) for k in range(1, len(traj)))
    write_csv(args.out, ["n", "gamma", "re_chi", "im_chi"], rows)
    report = bg.regime_report(cfg)
    if args.regime_out:
        write_json(args.regime_out, report)
    elif args.out in (None, "-"):
        # keep stdout a clean CSV stream
        print(json.dumps(report), file=sys.stderr)
    else:
        write_json("-", report)
    return 0


def cmd_oracle(args) -> int:
    if args.kind == "fermion":
        if args.modes + 1 > oracle.FERMION_MAX_MODES:
            raise ResourceLimit(f"{args.modes} bath modes need a 2**{args.modes + 1} dimensional space; "
                                f"at most {oracle.FERMION_MAX_MODES - 1} bath modes are supported")
        cfg = fg.QuantumConfig(omega=args.omega.rad, lam=args.lam.rad, tau=args.tau,
                               seed=args.seed, stream=args.stream)
        gammas = vertex_stream(args.seed, args.stream, 2, args.modes)
        report = oracle.fermion_simulate(cfg, gammas)
        offdiag = max((r.offdiag for r in report.records), default=0.0)
        ok = report.max_delta <= FERMION_DELTA_TOL and report.max_abs_a0 <= FERMION_A0_TOL \
            and offdiag <= FERMION_DELTA_TOL
        summary = (f"max |N - oracle| = {report.max_delta:.3e}, max |<f0>| = {report.max_abs_a0:.3e}, "
                   f"rho_S diagonal deviation = {offdiag:.3e}")
    else:
        cfg = _boson_cfg(args)
        gammas = vertex_stream(args.seed, args.stream, cfg.M, args.modes)
        report = oracle.boson_simulate(cfg, gammas, d=args.trunc, engine=args.engine)
        ok = report.max_delta <= BOSON_DELTA_TOL and report.min_purity >= 1 - BOSON_PURITY_TOL
        summary = (f"max |<b0> - chi| = {report.max_delta:.3e}, min purity = {report.min_purity:.12f}, "
                   f"engine = {report.config['engine']}, tail = {report.truncation_tail:.2e}")
    with output(args.out) as fh:
        fh.write(report.to_json() + "\n")
    print(("PASS " if ok else "FAIL ") + summary, file=sys.stderr)
    if not ok:
        raise OracleMismatch(summary)
    return 0


def _common(p, seed=True):
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    if seed:
        p.add_argument("--seed", type=nonneg_int, default=0, help="64-bit RNG seed")
        p.add_argument("--stream", type=nonneg_int, default=0, help="RNG stream index")


def _boson_flags(p, omega="2/1:pi", lam="1/3:pi", betas="roots3", chi0="0"):
    p.add_argument("--omega", type=parse_angle, default=omega,
                   help="omega*tau; 'r/s:pi' or 'p:pi' for exact multiples of pi, float otherwise")
    p.add_argument("--lambda", dest="lam", type=parse_angle, default=lam, help="lambda*tau, same syntax")
    p.add_argument("--betas", type=parse_betas, default=betas,
                   help="'roots3', 'roots3-shifted' or comma-separated complex amplitudes")
    p.add_argument("--chi0", type=complex, default=chi0, help="initial coherent amplitude of the system")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qchaos", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file supplying defaults for the subcommand's flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classical", help="classical chaos game trajectory (CSV n,gamma,x,y)")
    p.add_argument("--dim", type=int, choices=(1, 2), default=2)
    p.add_argument("--M", type=int, default=3, help="polygon vertex count (dim 2)")
    p.add_argument("--w", type=open_weight, required=True)
    p.add_argument("--steps", type=nonneg_int, required=True)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--y0", type=float, default=0.0)
    _common(p)
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("fermion", help="fermionic occupation trajectory (CSV n,gamma,N,S)")
    p.add_argument("--omega", type=parse_angle, default="0", help="mode frequency")
    p.add_argument("--lambda", dest="lam", type=parse_angle, required=True, help="coupling strength")
    p.add_argument("--tau", type=float, default=1.0, help="interaction time")
    p.add_argument("--steps", type=nonneg_int, required=True)
    _common(p)
    p.set_defaults(func=cmd_fermion)

    p = sub.add_parser("density", help="densities, moments, small-x exponent, entropy bounds")
    p.add_argument("--mode", required=True,
                   choices=("simulate", "iterate", "closed-form", "moments", "alpha", "entropy"))
    p.add_argument("--w", type=parse_w, required=True, help="weight, or 'wc' / 'golden'")
    p.add_argument("--K", type=int, default=200, help="bins, or moment / truncation order")
    p.add_argument("--steps", type=nonneg_int, default=1_000_000)
    p.add_argument("--burn-in", type=nonneg_int, default=1000)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--iterations", type=nonneg_int, default=None, help="fixed number of measure iterations")
    p.add_argument("--shards", type=int, default=1, help="independent streams to split the simulation over")
    p.add_argument("--threads", type=int, default=1, help="worker threads (does not change the output)")
    _common(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("boson", help="coherent-state game trajectory (CSV) and regime report (JSON)")
    _boson_flags(p)
    p.add_argument("--steps", type=nonneg_int, required=True)
    p.add_argument("--regime-out", default=None, help="path for the regime JSON")
    _common(p)
    p.set_defaults(func=cmd_boson)

    p = sub.add_parser("oracle", help="compare closed forms with exact state-vector evolution")
    p.add_argument("--kind", choices=("fermion", "boson"), required=True)
    p.add_argument("--modes", type=nonneg_int, default=6, help="bath modes (= interaction steps)")
    p.add_argument("--trunc", type=int, default=24, help="Fock truncation per bosonic mode")
    p.add_argument("--engine", choices=("auto", "full", "sequential"), default="auto")
    p.add_argument("--tau", type=float, default=1.0)
    _boson_flags(p, omega="1.0", lam="1/3:pi", chi0="0.5+0.3j")
    _common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def _read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise InvalidConfig(f"{path}:{lineno}: expected key=value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    config = next((argv[i + 1] for i, tok in enumerate(argv[:-1]) if tok == "--config"), None)
    config = config or next((tok.split("=", 1)[1] for tok in argv if tok.startswith("--config=")), None)
    command = next((tok for tok in argv if tok in subparsers.choices), None)
    if not config or command is None:
        return
    values = _read_config(config)
    sp = subparsers.choices[command]
    dests = {a.dest for a in sp._actions} - {"help", "func"}
    aliases = {"lambda": "lam"}
    values = {aliases.get(k, k): v for k, v in values.items()}
    unknown = sorted(set(values) - dests)
    if unknown:
        raise InvalidConfig(f"unknown config keys for '{command}': {', '.join(unknown)}")
    for action in sp._actions:
        if action.dest in values:
            action.required = False
    # string defaults go through each flag's type converter
    sp.set_defaults(**values)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except (InvalidConfig, ResourceLimit, OracleMismatch) as exc:
        if not isinstance(exc, OracleMismatch):
            print(f"qchaos: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"qchaos: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
