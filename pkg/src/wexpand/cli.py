"""Command-line front end.

Exit codes: 0 success, 1 ``--check`` mismatch, 2 invalid input, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

from . import analysis, circuit, fock, gates, sources

EXIT_CHECK = 1
EXIT_INVALID = 2
EXIT_RESOURCE = 3


class _Check:
    def __init__(self, args):
        self.tol_amp = args.tol_amp
        self.tol_prob = args.tol_prob
        self.problems: list[str] = []

    def close(self, label, got, want, tol=None):
        tol = self.tol_prob if tol is None else tol
        if got is None or not math.isclose(got, want, rel_tol=0, abs_tol=tol):
            self.problems.append(f"{label}: expected {want!r}, got {got!r}")


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: format(v, ".17g") if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def cmd_run(args, chk):
    res = circuit.run_circuit(args.circuit)
    if args.check:
        chk.problems += circuit.check_result(res, chk.tol_prob)
    row = {"probability": res["probability"], "fidelity": res.get("fidelity")}
    return res, [row]


def cmd_w_expand(args, chk):
    n = args.n
    state = fock.encode_qubits(gates.w_target(n))
    res = gates.expand_w(state, n - 1)
    formula = analysis.success_formula("expand_w", n)
    fid = gates.w_fidelity(res.conditional)
    chk.close("probability", res.success_prob, formula)
    chk.close("fidelity", fid, 1.0)
    out = {"n": n, "probability": res.success_prob, "formula": formula, "fidelity": fid,
           "output_modes": res.output_modes, "conditional_state": fock.state_to_records(res.conditional)}
    return out, [{k: out[k] for k in ("n", "probability", "formula", "fidelity")}]


def cmd_ghz_expand(args, chk):
    n = args.n
    state = fock.encode_qubits(gates.ghz_target(n))
    res = gates.ghz_plus2(state, n - 1, correct=not args.no_correct)
    formula = analysis.success_formula("ghz_plus2")
    fid = gates.ghz_fidelity(res.conditional)
    chk.close("probability", res.success_prob, formula)
    if not args.no_correct:
        chk.close("fidelity", fid, 1.0)
    out = {"n": n, "probability": res.success_prob, "formula": formula, "fidelity": fid,
           "corrected": not args.no_correct, "output_modes": res.output_modes,
           "conditional_state": fock.state_to_records(res.conditional)}
    return out, [{k: out[k] for k in ("n", "probability", "formula", "fidelity")}]


def cmd_cascade(args, chk):
    seed = "single_V" if args.seed == "v" else "epr_pair"
    feed = [int(m) for m in args.feed.split(",")] if args.feed else "lowest_new_mode"
    res = gates.cascade(gates.CascadePlan(seed, args.k, feed))
    kind = "cascade_odd" if seed == "single_V" else "cascade_even"
    formula = analysis.success_formula(kind, args.k)
    fid = gates.w_fidelity(res.state)
    chk.close("p_success", res.p_success, formula)
    chk.close("fidelity", fid, 1.0)
    out = {"seed": args.seed, "k": args.k, "p_success": res.p_success, "formula": formula,
           "stage_probs": res.stage_probs, "fidelity": fid, "modes": res.modes,
           "state": fock.state_to_records(res.state)}
    return out, [{k: out[k] for k in ("seed", "k", "p_success", "formula", "fidelity")}]


def cmd_feasibility(args, chk):
    if args.gammas or args.rates:
        gammas = args.gammas or [args.gamma]
        rates = args.rates or [args.rate]
        rows = sources.feasibility_sweep(args.config, gammas, rates, args.n_max)
        return {"config": args.config, "rows": rows}, rows
    params = sources._params(args.config, args.gamma, args.rate, args.n_max)
    rep = sources.feasibility_w4(params, args.config)
    if args.check:
        chk.close("breakdown sum", math.fsum(rep.breakdown.values()),
                  rep.signal_rate + rep.error_rate, 1e-12 * max(1.0, rep.signal_rate))
        ideal = (1, 1) if args.config == "pdc_pdc" else (1, 2)
        chk.close("ideal event click probability",
                  sources.simulate_event(args.config, *ideal)[0], analysis.success_formula("expand_w", 2))
    out = {"config": args.config, "gamma": args.gamma, "g_or_nu": args.rate, "n_max": args.n_max,
           **rep.to_dict()}
    row = {"gamma": args.gamma, "g_or_nu": args.rate, "signal": rep.signal_rate,
           "error": rep.error_rate, "fidelity": rep.fidelity}
    return out, [row]


def cmd_web(args, chk):
    prep = gates.prepare_w(args.n) if args.state == "w" else gates.prepare_ghz(args.n)
    q = fock.extract_qubits(prep.state, prep.modes)
    report = analysis.web_report(q)
    want = 2 / args.n if args.state == "w" else 0.0
    for (i, j), c in report.items():
        chk.close(f"concurrence({i},{j})", c, want, 1e-6 if args.state == "w" else chk.tol_prob)
    rows = [{"i": i, "j": j, "concurrence": c} for (i, j), c in report.items()]
    return {"state": args.state, "n": args.n, "modes": prep.modes, "pairs": rows}, rows


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wexpand", description="Linear-optics W/GHZ expansion gate simulator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", choices=("json", "csv"), default="json")
    common.add_argument("--check", action="store_true", help="compare against closed forms")
    common.add_argument("--tol-amp", type=float, default=fock.TOL_AMP)
    common.add_argument("--tol-prob", type=float, default=fock.TOL_PROB)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", parents=[common], help="evaluate a circuit file")
    s.add_argument("circuit", help="path to a circuit JSON file, or the name of a bundled one")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("w-expand", parents=[common], help="apply the W gate to |W_N>")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_w_expand)

    s = sub.add_parser("ghz-expand", parents=[common], help="apply the GHZ variant to |GHZ_N>")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--no-correct", action="store_true", help="skip the bit-flip correction")
    s.set_defaults(func=cmd_ghz_expand)

    s = sub.add_parser("cascade", parents=[common], help="cascade k W gates from a seed")
    s.add_argument("--seed", choices=("v", "epr"), required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--feed", help="comma-separated mode fed at each stage")
    s.set_defaults(func=cmd_cascade)

    s = sub.add_parser("feasibility", parents=[common], help="source-noise model for |W_4>")
    s.add_argument("--config", choices=sources.CONFIGS, default="pdc_pdc")
    s.add_argument("--gamma", type=float, default=1e-4)
    s.add_argument("--rate", type=float, default=1e-4, help="g (pdc_pdc) or nu (pdc_wcp)")
    s.add_argument("--n-max", type=int, default=3)
    s.add_argument("--gammas", type=_floats, help="comma-separated gamma sweep")
    s.add_argument("--rates", type=_floats, help="comma-separated g/nu sweep")
    s.set_defaults(func=cmd_feasibility)

    s = sub.add_parser("web", parents=[common], help="pairwise concurrences of an engine-built state")
    s.add_argument("--state", choices=("w", "ghz"), required=True)
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_web)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and args.circuit in circuit.bundled_names():
        args.circuit = str(circuit.bundled(args.circuit))
    chk = _Check(args)
    try:
        out, rows = args.func(args, chk)
    except fock.ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (circuit.CircuitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out == "csv":
        sys.stdout.write(_csv(rows))
    else:
        sys.stdout.write(fock.dump_json(out, indent=2) + "\n")
    if args.check:
        for msg in chk.problems:
            print(f"check failed: {msg}", file=sys.stderr)
        if chk.problems:
            return EXIT_CHECK
    return 0


if __name__ == "__main__":
    sys.exit(main())
