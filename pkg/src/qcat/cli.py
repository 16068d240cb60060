"""Command-line entry point.

Each subcommand validates its configuration, runs one experiment, writes
delimited output (CSV/PGM) plus rendered figures and a metadata JSON into the
output directory, and prints a one-line summary.  Exit codes: 0 success,
1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, densities, engine, experiments, pgm, plots, reports
from .circuits import cat_iteration, count_gates
from .lattice import ClassicalError, DensityGrid, LatticeSpec, evolve_density
from .verify import verify_adder, verify_map

# State vectors above this register width need --allow-large (memory guard);
# nothing above HARD_MAX_QUBITS is accepted at all.
DEFAULT_MAX_QUBITS = 27
HARD_MAX_QUBITS = 41


class CliError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _add_common(p, nq_default=7):
    p.add_argument("--nq", type=int, default=nq_default, help=f"bits per axis (default {nq_default})")
    p.add_argument("--seed", type=int, default=1, help="run seed (default 1)")
    p.add_argument("--out", type=str, default=None, help="output directory (default out/<command>)")
    p.add_argument("--binary", action="store_true", help="write binary (P5) instead of ASCII (P2) PGM")
    p.add_argument("--allow-large", action="store_true",
                   help=f"allow register widths above {DEFAULT_MAX_QUBITS} qubits")


def _spec_for(args) -> LatticeSpec:
    if not (1 <= args.nq <= 14):
        raise CliError(f"--nq must be in [1, 14], got {args.nq}")
    spec = LatticeSpec(args.nq)
    if spec.qubits > HARD_MAX_QUBITS:
        raise CliError(f"{spec.qubits} qubits is beyond the hard limit ({HARD_MAX_QUBITS})")
    if spec.qubits > DEFAULT_MAX_QUBITS and not args.allow_large:
        raise CliError(
            f"{spec.qubits} qubits needs --allow-large (default cap {DEFAULT_MAX_QUBITS})"
        )
    return spec


def _initial_density(text: str, spec: LatticeSpec) -> DensityGrid:
    if text == "line":
        return densities.line_density(spec)
    if text == "smile":
        return densities.smile_density(spec)
    if text.startswith("point:"):
        try:
            i, j = (int(v) for v in text[6:].split(","))
        except ValueError:
            raise CliError(f"--initial point wants 'point:I,J', got {text!r}") from None
        return densities.point_density(spec, i, j)
    if text.startswith("image:"):
        return pgm.read_density_pgm(text[6:], spec)
    raise CliError(f"unknown initial source {text!r} (line | smile | point:I,J | image:PATH)")


def _outdir(args, command: str) -> Path:
    out = Path(args.out) if args.out else Path("out") / command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _error_spec(args, spec: LatticeSpec) -> ClassicalError | None:
    if args.error == "none":
        return None
    if args.error == "lsb":
        return ClassicalError.lsb()
    if args.error == "shift":
        return ClassicalError.from_epsilon(args.eps_cl, spec, axes=args.error_axes)
    raise CliError(f"unknown error mode {args.error!r}")


def _metadata(command, args, spec, summary, timings, outputs):
    gc = count_gates(cat_iteration(spec))
    return reports.RunMetadata(
        command=command,
        config={k: v for k, v in sorted(vars(args).items()) if k != "func"},
        seed=args.seed,
        version=__version__,
        gate_counts={"per_iteration": dict(gc.counts), "total": gc.total, "qubits": spec.qubits},
        timings=timings,
        summary=summary,
        outputs=[str(p) for p in outputs],
    )


def cmd_classical_evolve(args) -> str:
    spec = _spec_for(args)
    out = _outdir(args, "classical-evolve")
    watch = reports.StopWatch()
    grid = _initial_density(args.initial, spec)
    final = evolve_density(grid, args.steps, reverse=args.reverse)
    files = [out / "initial.pgm", out / "final.pgm", out / "density.png"]
    pgm.write_density_pgm(grid, files[0], binary=args.binary)
    pgm.write_density_pgm(final, files[1], binary=args.binary)
    plots.save_density_figure(
        [grid, final], files[2], titles=["t = 0", f"t = {args.steps}"]
    )
    meta = _metadata("classical-evolve", args, spec, {"steps": args.steps},
                     {"run_s": watch.lap()}, files)
    meta.write(out / "metadata.json")
    return f"classical-evolve: nq={args.nq} steps={args.steps} -> {out}"


def cmd_quantum_evolve(args) -> str:
    spec = _spec_for(args)
    out = _outdir(args, "quantum-evolve")
    watch = reports.StopWatch()
    grid = _initial_density(args.initial, spec)
    state = engine.StateVector.from_density(grid)
    noise = engine.NoiseModel(args.eps, args.seed)
    circuit = cat_iteration(spec)
    for _ in range(args.steps):
        engine.apply_circuit(state, circuit, noise)
    final = engine.density_xy(state)
    norm_err = abs(state.norm2() - 1.0)
    leak = engine.carry_leakage(state)
    files = [out / "initial.pgm", out / "final.pgm", out / "density.png"]
    pgm.write_density_pgm(grid, files[0], binary=args.binary)
    pgm.write_density_pgm(final, files[1], binary=args.binary)
    plots.save_density_figure([grid, final], files[2], titles=["t = 0", f"t = {args.steps}"])
    summary = {"steps": args.steps, "epsilon": args.eps, "norm_error": norm_err,
               "carry_leakage": leak, "gate_applications": args.steps * len(circuit)}
    meta = _metadata("quantum-evolve", args, spec, summary, {"run_s": watch.lap()}, files)
    meta.write(out / "metadata.json")
    return (f"quantum-evolve: nq={args.nq} steps={args.steps} eps={args.eps} "
            f"norm_err={norm_err:.2e} leakage={leak:.3g} -> {out}")


def cmd_echo(args) -> str:
    spec = _spec_for(args)
    out = _outdir(args, "echo")
    watch = reports.StopWatch()
    grid = _initial_density(args.initial, spec)
    prep = None
    if args.noisy_prep:
        if args.initial != "line":
            raise CliError("--noisy-prep only applies to --initial line")
        from .circuits import line_prep

        prep = line_prep(spec)
    config = experiments.EchoConfig(
        initial=grid,
        t_r=args.tr,
        epsilon_q=args.eps,
        classical_error=_error_spec(args, spec),
        seed=args.seed,
        prep_circuit=prep,
    )
    result = experiments.run_echo(config)
    files = []
    ordered = [(0, "t0000"), (args.tr, f"t{args.tr:04d}")]
    for t, stem in ordered:
        path = out / f"snapshot_{stem}.pgm"
        pgm.write_density_pgm(result.snapshots[t], path, binary=args.binary)
        files.append(path)
    inv = out / "snapshot_inversion.pgm"
    pgm.write_density_pgm(result.post_inversion, inv, binary=args.binary)
    files.append(inv)
    final_path = out / f"snapshot_t{2 * args.tr:04d}.pgm"
    pgm.write_density_pgm(result.snapshots[2 * args.tr], final_path, binary=args.binary)
    files.append(final_path)
    fig = out / "echo.png"
    plots.save_density_figure(
        [result.snapshots[0], result.snapshots[args.tr], result.post_inversion,
         result.snapshots[2 * args.tr]],
        fig,
        titles=["t = 0", f"t = {args.tr}", "after inversion", f"t = {2 * args.tr}"],
    )
    files.append(fig)
    summary = {
        "return_fidelity": result.return_fidelity,
        "norm_error": result.norm_error,
        "carry_leakage": result.carry_leakage,
        "gate_applications": result.gate_applications,
    }
    meta = _metadata("echo", args, spec, summary, {"run_s": watch.lap()}, files)
    meta.write(out / "metadata.json")
    return (f"echo: nq={args.nq} tr={args.tr} eps={args.eps} error={args.error} "
            f"return_fidelity={result.return_fidelity:.6f} -> {out}")


def cmd_fidelity(args) -> str:
    spec = _spec_for(args)
    out = _outdir(args, "fidelity")
    watch = reports.StopWatch()
    grid = _initial_density(args.initial, spec)
    series = experiments.fidelity_vs_time(grid, args.eps, args.tmax, args.seed)
    csv_path = out / "fidelity.csv"
    reports.write_series_csv(csv_path, ("t", "f"), series.rows(),
                             comments=[f"nq={args.nq} eps={args.eps} seed={args.seed}"])
    fig = out / "fidelity.png"
    plots.save_fidelity_figure([series], [f"eps={args.eps}"], fig)
    t_half = series.crossing(0.5)
    summary = {"f_final": float(series.f[-1]), "t_half": t_half}
    meta = _metadata("fidelity", args, spec, summary,
                     {"run_s": watch.lap()}, [csv_path, fig])
    meta.write(out / "metadata.json")
    half = f"{t_half:.1f}" if t_half is not None else "none"
    return (f"fidelity: nq={args.nq} eps={args.eps} tmax={args.tmax} "
            f"f(tmax)={series.f[-1]:.4f} t_half={half} -> {out}")


def cmd_classical_echo(args) -> str:
    spec = _spec_for(args)
    out = _outdir(args, "classical-echo")
    watch = reports.StopWatch()
    grid = _initial_density(args.initial, spec)
    error = _error_spec(args, spec)
    if error is None:
        raise CliError("classical-echo needs --error shift or --error lsb")
    t_values = range(1, args.te_max + 1)
    series = experiments.classical_echo_series(grid, t_values, error)
    csv_path = out / "classical.csv"
    reports.write_series_csv(csv_path, ("te", "fc"), series.rows(),
                             comments=[f"nq={args.nq} error={args.error} eps_cl={args.eps_cl}"])
    files = [csv_path]
    all_series, labels = [series], ["classical"]
    summary = {"fc_final": float(series.f[-1]), "t_half": series.crossing(0.5)}
    if args.quantum:
        qseries = experiments.classical_echo_series(
            grid, t_values, error, quantum=True, epsilon_q=args.eps, seed=args.seed
        )
        qcsv = out / "quantum.csv"
        reports.write_series_csv(qcsv, ("te", "fc"), qseries.rows(),
                                 comments=[f"quantum pipeline eps={args.eps} seed={args.seed}"])
        files.append(qcsv)
        all_series.append(qseries)
        labels.append(f"quantum eps={args.eps}")
        summary["fc_quantum_final"] = float(qseries.f[-1])
    fig = out / "classical_echo.png"
    plots.save_fidelity_figure(all_series, labels, fig, logy=True,
                               xlabel="inversion time t_e", ylabel="recovered fraction f_c")
    files.append(fig)
    meta = _metadata("classical-echo", args, spec, summary, {"run_s": watch.lap()}, files)
    meta.write(out / "metadata.json")
    th = summary["t_half"]
    return (f"classical-echo: nq={args.nq} error={args.error} te<=:{args.te_max} "
            f"t_half={th if th is None else f'{th:.2f}'} -> {out}")


def cmd_tf_scan(args) -> str:
    nq_list = [int(v) for v in args.nq_list.split(",")]
    eps_list = [float(v) for v in args.eps_list.split(",")]
    for nq in nq_list:
        probe = argparse.Namespace(nq=nq, allow_large=args.allow_large)
        _spec_for(probe)
    out = _outdir(args, "tf-scan")
    watch = reports.StopWatch()
    result = experiments.tf_scan(nq_list, eps_list, args.seeds, base_seed=args.seed)
    rows_path = out / "rows.csv"
    reports.write_table_csv(
        rows_path,
        ("nq", "eps", "seed", "tf", "saturated"),
        [(r.n_q, r.epsilon, r.seed, r.t_f, int(r.saturated)) for r in result.rows],
    )
    collapsed = result.collapsed()
    fit_comment = f"fit C={result.prefactor:.6g}, slope={-result.slope:.6g}"
    collapse_path = out / "collapse.csv"
    reports.write_series_csv(collapse_path, ("eps2nq", "tf"), collapsed.rows(),
                             comments=[fit_comment])
    fig = out / "scan.png"
    plots.save_scan_figure(result, fig)
    summary = {"prefactor": result.prefactor, "slope": result.slope,
               "residual_rms": result.residual_rms}
    meta = _metadata("tf-scan", args, LatticeSpec(max(nq_list)), summary,
                     {"run_s": watch.lap()}, [rows_path, collapse_path, fig])
    meta.write(out / "metadata.json")
    return (f"tf-scan: grid {args.nq_list} x {args.eps_list} seeds={args.seeds} "
            f"C={result.prefactor:.3f} slope={result.slope:.3f} -> {out}")


def cmd_harmonics(args) -> str:
    spec = _spec_for(args)
    out = _outdir(args, "harmonics")
    watch = reports.StopWatch()
    grid = _initial_density(args.initial, spec)
    state = engine.StateVector.from_density(grid)
    if args.steps:
        circuit = cat_iteration(spec)
        for _ in range(args.steps):
            engine.apply_circuit(state, circuit)
    pairs = experiments.harmonics(state, args.register, args.k)
    csv_path = out / "harmonics.csv"
    reports.write_series_csv(csv_path, ("freq", "weight"), pairs,
                             comments=[f"register={args.register} top-{args.k}"])
    fig = out / "spectrum.png"
    plots.save_spectrum_figure(pairs, fig, register=args.register)
    summary = {"top": [[int(f), float(w)] for f, w in pairs[: min(4, len(pairs))]]}
    meta = _metadata("harmonics", args, spec, summary, {"run_s": watch.lap()}, [csv_path, fig])
    meta.write(out / "metadata.json")
    top_f, top_w = pairs[0]
    return (f"harmonics: nq={args.nq} register={args.register} "
            f"top freq={top_f} weight={top_w:.4f} -> {out}")


def cmd_nonreturn(args) -> str:
    spec = _spec_for(args)
    out = _outdir(args, "nonreturn")
    watch = reports.StopWatch()
    grid = densities.line_density(spec)
    config = experiments.EchoConfig(initial=grid, t_r=args.tr, epsilon_q=args.eps, seed=args.seed)
    result = experiments.run_echo(config)
    rng = np.random.default_rng(experiments.derive_seed(args.seed, 0xFACE))
    estimate = experiments.nonreturn_probability(
        result.final_state, {spec.n // 2}, args.shots, rng, iterations=2 * args.tr
    )
    wx = engine.marginal_x(result.final_state)
    wx_path = out / "wx.csv"
    reports.write_series_csv(wx_path, ("x", "w"), enumerate(wx.tolist()),
                             comments=[f"return moment t={2 * args.tr}"])
    fig = out / "wx.png"
    plots.save_marginal_figure(wx, fig, highlight=spec.n // 2)
    summary = {
        "p_nonreturn": estimate.p_nr,
        "epsilon_hat": estimate.epsilon_hat,
        "epsilon_true": args.eps,
        "return_fidelity": result.return_fidelity,
        "shots": args.shots,
    }
    meta = _metadata("nonreturn", args, spec, summary, {"run_s": watch.lap()}, [wx_path, fig])
    meta.write(out / "metadata.json")
    return (f"nonreturn: nq={args.nq} eps={args.eps} tr={args.tr} shots={args.shots} "
            f"P_nr={estimate.p_nr:.4f} eps_hat={estimate.epsilon_hat:.4f} -> {out}")


def cmd_gate_count(args) -> str:
    spec = _spec_for(args)
    circuit = cat_iteration(spec)
    gc = count_gates(circuit)
    if args.dump:
        out = _outdir(args, "gate-count")
        path = out / "iteration.txt"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(circuit.pretty())
    return f"qubits={spec.qubits} toffoli={gc.toffoli} cnot={gc.cnot} total={gc.total}"


def cmd_verify(args) -> str:
    spec = _spec_for(args)
    n = min(spec.n_q, 8)
    lines = []
    ok = True
    for report in (verify_adder(n), verify_map(n), verify_map(n, reverse=True)):
        lines.append(report.summary())
        ok = ok and report.passed
    if not ok:
        raise RuntimeError("verification failed:\n" + "\n".join(lines))
    return "; ".join(lines)


def build_parser() -> _Parser:
    parser = _Parser(prog="qcat", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qcat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classical-evolve", help="push a density through the integer map")
    _add_common(p)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--reverse", action="store_true", help="use the factor-swapped iteration")
    p.add_argument("--initial", type=str, default="smile")
    p.set_defaults(func=cmd_classical_evolve)

    p = sub.add_parser("quantum-evolve", help="evolve the state vector, optionally with gate noise")
    _add_common(p)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--eps", type=float, default=0.0, help="gate noise amplitude")
    p.add_argument("--initial", type=str, default="smile")
    p.set_defaults(func=cmd_quantum_evolve)

    p = sub.add_parser("echo", help="time-inversion test with optional noise and classical error")
    _add_common(p)
    p.add_argument("--tr", type=int, default=10, help="iterations before inversion")
    p.add_argument("--eps", type=float, default=0.0, help="gate noise amplitude")
    p.add_argument("--error", choices=("none", "shift", "lsb"), default="none",
                   help="classical error applied at the inversion")
    p.add_argument("--eps-cl", type=float, default=None, help="classical error size (default 1/n)")
    p.add_argument("--error-axes", choices=("both", "i", "j"), default="both")
    p.add_argument("--initial", type=str, default="smile")
    p.add_argument("--noisy-prep", action="store_true",
                   help="prepare the line state through noisy gates instead of exactly")
    p.set_defaults(func=cmd_echo)

    p = sub.add_parser("fidelity", help="fidelity between noisy and exact evolution vs time")
    _add_common(p)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--tmax", type=int, default=400)
    p.add_argument("--initial", type=str, default="line")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("classical-echo", help="recovered fraction vs inversion time")
    _add_common(p)
    p.add_argument("--te-max", type=int, default=13)
    p.add_argument("--error", choices=("shift", "lsb"), default="shift")
    p.add_argument("--eps-cl", type=float, default=None)
    p.add_argument("--error-axes", choices=("both", "i", "j"), default="both")
    p.add_argument("--initial", type=str, default="smile")
    p.add_argument("--quantum", action="store_true", help="also run the noisy quantum pipeline")
    p.add_argument("--eps", type=float, default=0.01, help="gate noise for --quantum")
    p.set_defaults(func=cmd_classical_echo)

    p = sub.add_parser("tf-scan", help="fidelity half-life scan over (n_q, eps)")
    _add_common(p, nq_default=6)
    p.add_argument("--nq-list", type=str, default="4,5,6")
    p.add_argument("--eps-list", type=str, default="0.01,0.03,0.1")
    p.add_argument("--seeds", type=int, default=5)
    p.set_defaults(func=cmd_tf_scan)

    p = sub.add_parser("harmonics", help="dominant register harmonics via the Fourier circuit")
    _add_common(p)
    p.add_argument("--register", choices=("x", "y"), default="y")
    p.add_argument("-k", type=int, default=8, help="number of harmonics to report")
    p.add_argument("--steps", type=int, default=0, help="exact iterations before the transform")
    p.add_argument("--initial", type=str, default="smile")
    p.set_defaults(func=cmd_harmonics)

    p = sub.add_parser("nonreturn", help="estimate the noise amplitude from non-return sampling")
    _add_common(p)
    p.add_argument("--tr", type=int, default=200)
    p.add_argument("--eps", type=float, default=0.03)
    p.add_argument("--shots", type=int, default=10000)
    p.set_defaults(func=cmd_nonreturn)

    p = sub.add_parser("gate-count", help="gate tallies of one map iteration")
    _add_common(p, nq_default=4)
    p.add_argument("--dump", action="store_true", help="also write the gate listing")
    p.set_defaults(func=cmd_gate_count)

    p = sub.add_parser("verify", help="exhaustive adder and map equivalence checks")
    _add_common(p, nq_default=4)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "eps_cl", None) is None and hasattr(args, "eps_cl"):
            args.eps_cl = 1.0 / (1 << args.nq)
        print(args.func(args))
        return 0
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, pgm.PgmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
