"""Command-line interface: ``iglfr {fit,gof,simulate,eval,sample,plotdata}``.

Exit codes: 0 success, 1 input error, 2 non-convergence, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import bayes, datasets, gof, simulation
from . import distribution as dist
from .distribution import Params
from .errors import DataError, DomainError, NumericalError
from .frequentist import NAMES, FitConfig, asymptotic_cis, fit_mle, fit_mps

EXIT_OK, EXIT_INPUT, EXIT_NONCONV, EXIT_NUMERIC = 0, 1, 2, 3


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text, k=None, what="value"):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse {what} {text!r}") from None
    if k is not None and len(vals) != k:
        raise InputError(f"{what} needs {k} comma-separated numbers, got {len(vals)}")
    return vals


def _grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError("grid must be LO:HI:COUNT")
    lo, hi = float(parts[0]), float(parts[1])
    m = int(parts[2])
    if m < 1 or not lo < hi:
        raise InputError("grid needs LO < HI and COUNT >= 1")
    return np.linspace(lo, hi, m)


def _g(v):
    return f"{float(v):.17g}"


def _f4(v):
    return "NA" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{float(v):.4f}"


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _params_from(args) -> Params:
    if getattr(args, "params", None):
        return Params(*_floats(args.params, 3, "--params"))
    return Params(args.alpha, args.beta, args.theta)


def _add_params(p):
    p.add_argument("--params", help="alpha,beta,theta")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--theta", type=float, default=1.0)


def _load(args):
    if not args.data:
        raise InputError("--data is required (builtin:NAME or a file path)")
    return datasets.resolve(args.data, args.input_format, args.column)


# --------------------------------------------------------------------------

def _freq_fit(method, s, init):
    f = fit_mle if method == "mle" else fit_mps
    return f(s, init=init, config=FitConfig())


def cmd_fit(args) -> int:
    d = _load(args)
    s = d.values
    methods = args.method or ["mle"]
    init = Params(*_floats(args.init, 3, "--init")) if args.init else None
    results, status = [], EXIT_OK
    mle = None
    for m in methods:
        if m in ("mle", "mps"):
            fit = _freq_fit(m, s, init)
            if m == "mle":
                mle = fit
            entry = {"method": fit.method, "converged": fit.converged, "iterations": fit.iterations,
                     "objective": fit.objective, "fixed": list(fit.fixed),
                     "estimates": dict(zip(NAMES, fit.params.as_array().tolist())),
                     "std_errors": dict(zip(NAMES, fit.std_errors.tolist()))}
            if fit.converged:
                entry["intervals"] = {c.parameter: [c.lower, c.upper] for c in asymptotic_cis(fit, args.level)}
                rep = gof.ks_test(s, fit.params, args.ks_method)
                entry["ks"] = {"statistic": rep.ks_statistic, "p_value": rep.p_value, "method": rep.method}
            else:
                status = EXIT_NONCONV
            results.append(entry)
        else:
            if mle is None:
                mle = fit_mle(s, init=init)
            if not mle.converged:
                status = EXIT_NONCONV
            prior = (bayes.PriorSpec(*_floats(args.prior, 6, "--prior")) if args.prior
                     else bayes.default_prior(mle, s))
            start = init or bayes.default_init(mle, prior)
            cfg = bayes.McmcConfig(iterations=args.mcmc_k, burn_in=args.burn_in, seed=args.seed,
                                   proposal_sds=bayes.default_proposal_sds(mle, start), adapt=args.adapt)
            chain = bayes.run_mcmc(s, prior, cfg, start)
            est = bayes.bayes_estimates_self(chain)
            cis = bayes.credible_intervals(chain, args.level, args.interval)
            results.append({"method": "Bayes", "estimates": dict(zip(NAMES, est.as_array().tolist())),
                            "intervals": {c.parameter: [c.lower, c.upper] for c in cis},
                            "acceptance_rates": dict(zip(NAMES, chain.acceptance_rates.tolist())),
                            "prior": dict(zip("abcdpq", prior.as_array().tolist())),
                            "mcmc": {"iterations": cfg.iterations, "burn_in": cfg.burn_in, "seed": cfg.seed,
                                     "proposal_sds": list(cfg.proposal_sds)}})
            if args.chain_out:
                with open(args.chain_out, "w", encoding="utf-8") as fh:
                    bayes.write_chain_csv(chain, fh)

    if args.format == "json":
        text = json.dumps({"data": d.name, "n": len(s), "level": args.level, "results": results}, indent=2) + "\n"
    elif args.format == "csv":
        rows = []
        for r in results:
            for q in NAMES:
                lo, hi = r.get("intervals", {}).get(q, [math.nan, math.nan])
                se = r.get("std_errors", {}).get(q, math.nan)
                rows.append([r["method"], q, _g(r["estimates"][q]), _g(se), _g(lo), _g(hi), args.level])
        text = _rows_csv(["method", "parameter", "estimate", "std_error", "lower", "upper", "level"], rows)
    else:
        lines = [f"data: {d.name} (n = {len(s)})"]
        for r in results:
            lines.append("")
            head = r["method"]
            if "converged" in r:
                head += f"  converged={r['converged']}  objective={r['objective']:.4f}"
                if r["fixed"]:
                    head += f"  on boundary: {', '.join(r['fixed'])} = 0"
            lines.append(head)
            lines.append(f"  {'param':<6} {'estimate':>14} {'SE':>12} {'lower':>14} {'upper':>14}")
            for q in NAMES:
                lo, hi = r.get("intervals", {}).get(q, [math.nan, math.nan])
                se = r.get("std_errors", {}).get(q, math.nan)
                lines.append(f"  {q:<6} {_f4(r['estimates'][q]):>14} {_f4(se):>12} {_f4(lo):>14} {_f4(hi):>14}")
            if "ks" in r:
                lines.append(f"  K-S D = {_f4(r['ks']['statistic'])}  p-value = {_f4(r['ks']['p_value'])}")
            if "acceptance_rates" in r:
                acc = ", ".join(f"{q} {v:.3f}" for q, v in r["acceptance_rates"].items())
                lines.append(f"  acceptance: {acc}")
        text = "\n".join(lines) + "\n"
    _write(text, args.out)
    return status


def cmd_gof(args) -> int:
    d = _load(args)
    status = EXIT_OK
    if args.fit:
        fit = _freq_fit(args.fit, d.values, None)
        if not fit.converged:
            status = EXIT_NONCONV
        p = fit.params
    else:
        p = _params_from(args)
    rep = gof.ks_test(d.values, p, args.ks_method)
    vals = {"n": rep.n, "alpha": p.alpha, "beta": p.beta, "theta": p.theta,
            "ks_statistic": rep.ks_statistic, "p_value": rep.p_value, "method": rep.method}
    if args.format == "json":
        text = json.dumps(vals, indent=2) + "\n"
    elif args.format == "csv":
        text = _rows_csv(list(vals), [[v if isinstance(v, (int, str)) else _g(v) for v in vals.values()]])
    else:
        text = (f"data: {d.name} (n = {rep.n})\nparams: alpha={_f4(p.alpha)} beta={_f4(p.beta)} theta={_f4(p.theta)}\n"
                f"K-S D = {_f4(rep.ks_statistic)}  p-value = {_f4(rep.p_value)} ({rep.method})\n")
    _write(text, args.out)
    return status


def cmd_simulate(args) -> int:
    names = {"mle": "MLE", "mps": "MPS", "bayes": "Bayes"}
    methods = tuple(names[m.strip().lower()] for m in args.methods.split(",") if m.strip())
    sc = simulation.SimulationScenario(
        truth=Params(*_floats(args.truth, 3, "--truth")),
        sample_sizes=tuple(int(v) for v in _floats(args.n, None, "--n")),
        replications=args.reps, seed=args.seed, methods=methods,
        prior=bayes.PriorSpec(*_floats(args.prior, 6, "--prior")) if args.prior else None,
        mcmc=bayes.McmcConfig(iterations=args.mcmc_k, burn_in=args.burn_in),
        level=args.level, workers=args.threads)
    rep = simulation.run_scenario(sc)
    if args.out:
        with open(args.out + ".csv", "w", encoding="utf-8") as fh:
            simulation.write_csv(rep, fh)
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            simulation.write_json(rep, fh)
    if args.format == "json":
        sys.stdout.write(json.dumps(rep.to_dict(), indent=2) + "\n")
    elif args.format == "csv":
        buf = io.StringIO()
        simulation.write_csv(rep, buf)
        sys.stdout.write(buf.getvalue())
    else:
        print(f"{'n':>5} {'method':<6} {'param':<6} {'bias':>9} {'MSE':>9} {'length':>9} {'CP':>7} {'fail':>5}")
        for (n, m, q), c in sorted(rep.cells.items(), key=lambda kv: simulation._cell_order(kv[0])):
            print(f"{n:>5} {m:<6} {q:<6} {_f4(c.bias):>9} {_f4(c.mse):>9} {_f4(c.avg_length):>9} "
                  f"{_f4(c.coverage):>7} {c.failures:>5}")
        if len(methods) > 1:
            wins = simulation.compare_methods(rep)["wins"]
            print("cells ranked first (MSE, |bias|): " +
                  "; ".join(f"{m} {w['mse']}, {w['abs_bias']}" for m, w in wins.items()))
        print(f"prior: {dict(zip('abcdpq', np.round(sc.prior.as_array(), 6).tolist()))}; "
              f"MCMC K={sc.mcmc.iterations}, burn-in={sc.mcmc.burn_in}; runtime {rep.runtime:.1f} s")
    return EXIT_OK


_FUNCS = {
    "pdf": dist.pdf, "logpdf": dist.log_pdf, "cdf": dist.cdf, "survival": dist.survival,
    "hazard": dist.hazard, "reversed_hazard": dist.reversed_hazard, "odds": dist.odd_function,
    "quantile": dist.quantile,
}


def cmd_eval(args) -> int:
    p = _params_from(args)
    x = _grid(args.grid) if args.grid else np.asarray(_floats(args.x, None, "--x"))
    y = np.atleast_1d(_FUNCS[args.fn](p, x))
    if args.format == "json":
        text = json.dumps({"fn": args.fn, "x": x.tolist(), "y": y.tolist()}) + "\n"
    elif args.format == "table":
        text = "".join(f"{_f4(a):>14} {_f4(b):>14}\n" for a, b in zip(x, y))
    else:
        text = _rows_csv(["x", args.fn], [[_g(a), _g(b)] for a, b in zip(x, y)])
    _write(text, args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    p = _params_from(args)
    draws = dist.sample(p, args.n, args.seed)
    if args.format == "json":
        text = json.dumps(draws.tolist()) + "\n"
    else:
        text = _rows_csv(["value"], [[_g(v)] for v in draws])
    _write(text, args.out)
    return EXIT_OK


def cmd_plotdata(args) -> int:
    d = _load(args)
    status = EXIT_OK
    if args.fit != "none":
        fit = _freq_fit(args.fit, d.values, None)
        status = EXIT_OK if fit.converged else EXIT_NONCONV
        p = fit.params
    else:
        p = _params_from(args)
    kinds = gof.PLOT_KINDS if args.kind == "all" else (args.kind,)
    _write("".join(gof.plot_data_csv(p, d.values, k) for k in kinds), args.out)
    return status


def _common(p, fmt="table", seed=12345):
    p.add_argument("--data", help="builtin:flood, builtin:covid or a file path")
    p.add_argument("--input-format", choices=("whitespace", "csv"), default=None,
                   help="data file format (default: by extension)")
    p.add_argument("--column", default=0,
                   type=lambda v: int(v) if v.lstrip("-").isdigit() else v,
                   help="CSV column index or header name")
    p.add_argument("--format", choices=("table", "csv", "json"), default=fmt)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out", help="output file (default stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="iglfr", description="Inverse generalized linear failure rate toolkit.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = _common(sub.add_parser("fit", help="estimate parameters"))
    f.add_argument("--method", action="append", choices=("mle", "mps", "bayes"))
    f.add_argument("--init", help="alpha,beta,theta starting values")
    f.add_argument("--level", type=float, default=0.95)
    f.add_argument("--prior", help="gamma hyperparameters a,b,c,d,p,q (shape,scale per parameter)")
    f.add_argument("--mcmc-k", type=int, default=50_000)
    f.add_argument("--burn-in", type=int, default=None, help="default 20%% of --mcmc-k")
    f.add_argument("--interval", choices=("shortest", "equal"), default="shortest")
    f.add_argument("--adapt", action="store_true", help="tune proposal scales during burn-in")
    f.add_argument("--chain-out", help="write the MCMC chain as CSV")
    f.add_argument("--ks-method", choices=("exact", "asymptotic"), default="exact")
    f.set_defaults(func=cmd_fit)

    g = _common(sub.add_parser("gof", help="Kolmogorov-Smirnov test"))
    g.add_argument("--fit", choices=("mle", "mps"))
    g.add_argument("--ks-method", choices=("exact", "asymptotic"), default="exact")
    _add_params(g)
    g.set_defaults(func=cmd_gof)

    s = _common(sub.add_parser("simulate", help="Monte Carlo study"), seed=20240101)
    s.add_argument("--truth", default="0.5,0.5,1")
    s.add_argument("--n", default="20,50,100", help="comma-separated sample sizes")
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--methods", default="mle,mps,bayes")
    s.add_argument("--prior", help="a,b,c,d,p,q (default: mean = truth, shape 2)")
    s.add_argument("--mcmc-k", type=int, default=5000)
    s.add_argument("--burn-in", type=int, default=1000)
    s.add_argument("--level", type=float, default=0.95)
    s.add_argument("--threads", type=int, default=1, help="worker processes")
    s.set_defaults(func=cmd_simulate)

    e = _common(sub.add_parser("eval", help="evaluate a distribution function"), fmt="csv")
    e.add_argument("--fn", choices=tuple(_FUNCS), default="pdf")
    e.add_argument("--grid", help="LO:HI:COUNT")
    e.add_argument("--x", help="comma-separated points")
    _add_params(e)
    e.set_defaults(func=cmd_eval)

    sm = _common(sub.add_parser("sample", help="draw random variates"), fmt="csv")
    sm.add_argument("--n", type=int, default=10)
    _add_params(sm)
    sm.set_defaults(func=cmd_sample)

    pd = _common(sub.add_parser("plotdata", help="plot coordinates as CSV"))
    pd.add_argument("--kind", choices=gof.PLOT_KINDS + ("all",), default="all")
    pd.add_argument("--fit", choices=("mle", "mps", "none"), default="mle",
                    help="fit the data first, or 'none' to use the given parameters")
    _add_params(pd)
    pd.set_defaults(func=cmd_plotdata)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "eval" and not (args.grid or args.x):
        ap.error("eval needs --grid or --x")
    try:
        return args.func(args)
    except (InputError, DataError, DomainError, ValueError) as e:
        print(f"iglfr: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ArithmeticError) as e:
        print(f"iglfr: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
