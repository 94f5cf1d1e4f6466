"""Command-line front end.

Every command prints a short human-readable summary followed by nothing
else, or with ``--format json`` a single JSON document holding the resolved
configuration, the result and an audit transcript.  ``--transcript PATH``
additionally writes that document to a file.  Output is deterministic for a
fixed configuration and seed.

Exit codes: 0 success, 2 certificate failure, 3 budget exceeded, 4 usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Optional

import mpmath

from . import errors
from .exact import (
    DEFAULT_PREC,
    GaussianRational,
    UnitPoint,
    as_fraction,
    format_gaussian,
    parse_angle,
    parse_gaussian,
    rational_circle_point,
)

EXIT_OK, EXIT_CERT, EXIT_BUDGET, EXIT_USAGE = 0, 2, 3, 4

_CERT_ERRORS = (
    errors.CertificationFailed,
    errors.CoverViolated,
    errors.HypothesisFailed,
    errors.SeparationFailure,
    errors.InconsistentOracle,
    errors.Indeterminate,
    errors.NoConvergence,
)
_BUDGET_ERRORS = (errors.BudgetExceeded, errors.TooLarge, errors.SeedUnavailable)
_USAGE_ERRORS = (
    errors.PreconditionViolated,
    errors.DegreeViolation,
    errors.NoPerfectMatching,
    errors.ZeroDenominator,
)

ANGLE_EPS = Fraction(1, 10 ** 15)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# Literal parsing
# ---------------------------------------------------------------------------


def parse_rational(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"expected a rational such as 1/4 or 1e-3, got {text!r}") from exc


def parse_complex(text: str) -> GaussianRational:
    """Gaussian literal ``a/b+c/d i`` or an angle such as ``pi/3``.

    Angles are turned into an exact rational point on the circle within
    ``1e-15`` of ``e^{i·angle}``.
    """
    if "pi" in text or "π" in text:
        return rational_circle_point(parse_angle(text), ANGLE_EPS)
    try:
        return parse_gaussian(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"expected a complex literal such as 3/5+4/5 i or pi/3, got {text!r}") from exc


def parse_unit(text: str) -> UnitPoint:
    z = parse_complex(text)
    if z.norm2() != 1:
        raise UsageError(f"{text!r} is not on the unit circle; use an exact point or an angle like pi/3")
    return UnitPoint.of(z)


def load_graph(path: str):
    from .ising import Graph

    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read graph file {path!r}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"graph file {path!r} is not valid JSON: {exc}") from exc
    G = Graph.from_json(data)
    if Graph.from_json(G.to_json()).to_json() != G.to_json():
        raise UsageError("graph file does not round-trip; check vertex labels")
    return G


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} needs " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, GaussianRational):
        return format_gaussian(x)
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return mpmath.nstr(x, 25)
    return str(x)


# ---------------------------------------------------------------------------
# Commands. Each returns (summary lines, result dict, transcript list).
# ---------------------------------------------------------------------------


def cmd_eval(args):
    from .ising import partition_bruteforce, partition_function

    _need(args, "graph", "lambda_", "b")
    G = load_graph(args.graph)
    lam, b = parse_complex(args.lambda_), parse_rational(args.b)
    Z = partition_function(G, lam, b)[()]
    result = {"Z": format_gaussian(Z), "n": G.n, "m": sum(k for *_, k in G.edges)}
    lines = [f"Z = {format_gaussian(Z)}"]
    transcript = []
    if args.check and G.n <= 16:
        Zb = partition_bruteforce(G, lam, b)
        result["bruteforce_agrees"] = Zb == Z
        transcript.append({"check": "bruteforce", "value": format_gaussian(Zb)})
        if Zb != Z:
            raise errors.CertificationFailed("brute-force value differs", witness=format_gaussian(Zb))
    return lines, result, transcript


def cmd_field(args):
    from .gadgets import implement_field
    from .ising import Graph

    _need(args, "delta", "b", "lambda_", "target", "eps")
    lam = parse_unit(args.lambda_)
    target = parse_unit(args.target)
    b, eps = parse_rational(args.b), parse_rational(args.eps)
    impl = implement_field(args.delta, b, lam, target, eps, seed_budget=args.seed_budget)
    dot = impl.tree.to_dot()
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(dot + "\n")
    if args.tree_json:
        g, root = impl.tree.to_graph()
        doc = {"root": root, **g.to_json()}
        if Graph.from_json(doc).to_json() != g.to_json():
            raise errors.CertificationFailed("tree graph does not round-trip through JSON")
        with open(args.tree_json, "w") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")
    dist = mpmath.sqrt(mpmath.mpf(impl.distance_sq.numerator) / impl.distance_sq.denominator)
    result = {
        "field": format_gaussian(impl.field),
        "distance": mpmath.nstr(dist, 12),
        "distance_sq_bound_met": impl.distance_sq <= eps * eps,
        "size": impl.tree.size,
        "root_degree": impl.tree.root_degree,
        "plan": impl.plan.to_json(),
    }
    lines = [dot] if not args.dot else [f"tree written to {args.dot}"]
    lines += [f"size = {impl.tree.size}", f"root degree = {impl.tree.root_degree}",
              f"verified |field - target| = {mpmath.nstr(dist, 6)} <= {args.eps}"]
    return lines, result, [{"plan": impl.plan.to_json()}]


def cmd_orbit(args):
    from .dynamics import ORBIT_CSV_HEADER, MapParams, orbit

    _need(args, "lambda_", "k", "b", "z0", "n")
    p = MapParams(parse_unit(args.lambda_), args.k, parse_rational(args.b))
    pts = orbit(p, parse_unit(args.z0), args.n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ORBIT_CSV_HEADER)
    for pt in pts:
        w.writerow(pt.csv_row())
    text = buf.getvalue().rstrip("\n")
    result = {"csv": text, "exact_steps": sum(pt.point is not None for pt in pts)}
    return [text], result, []


def cmd_zeros(args):
    from .ising import lee_yang_zeros

    _need(args, "graph", "b")
    G = load_graph(args.graph)
    roots = lee_yang_zeros(G, parse_rational(args.b))
    rows = []
    for r in roots:
        z = r.value if hasattr(r, "value") else r
        rows.append([mpmath.nstr(z.real, 20), mpmath.nstr(z.imag, 20), mpmath.nstr(abs(abs(z) - 1), 6)])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "modulus_deviation"])
    w.writerows(rows)
    text = buf.getvalue().rstrip("\n")
    return [text], {"csv": text, "count": len(rows)}, []


def cmd_threshold(args):
    from .dynamics import lambda_threshold, parabolic_real_part

    _need(args, "b")
    b = parse_rational(args.b)
    ks = [args.k] if args.k is not None else list(range(1, 6))
    rows, lines = [], ["k,exists,re_lambda,im_lambda,arg_lambda,re_parabolic_point"]
    for k in ks:
        t = lambda_threshold(k, b)
        if t.lambda_k is None:
            rows.append({"k": k, "exists": False})
            lines.append(f"{k},false,,,,")
            continue
        row = {"k": k, "exists": t.exists, "re": mpmath.nstr(t.lambda_k.real, 20),
               "im": mpmath.nstr(t.lambda_k.imag, 20), "arg": mpmath.nstr(t.angle.value, 20),
               "re_parabolic_point": str(parabolic_real_part(k, b))}
        rows.append(row)
        lines.append(f"{k},{str(t.exists).lower()},{row['re']},{row['im']},{row['arg']},{row['re_parabolic_point']}")
    return lines, {"rows": rows}, []


def cmd_cover(args):
    from .dynamics import LinearMap, compose_image, cover_and_contract, covering_easy_even

    if args.kind == "linear":
        alpha = parse_rational(args.alpha)
        lo, hi = (parse_rational(x) for x in args.interval.split(","))
        maps = [LinearMap(alpha, 0), LinearMap(alpha, 1 - alpha)]
        seq = cover_and_contract(maps, (lo, hi))
        img = (compose_image(maps, seq, 0), compose_image(maps, seq, 1))
        result = {"sequence": seq, "image": [str(img[0]), str(img[1])], "inside": lo < img[0] and img[1] < hi}
        return [f"sequence = {''.join(map(str, seq))}", f"image = [{float(img[0])}, {float(img[1])}]"], result, []
    from .gadgets import seed_pair_search

    _need(args, "delta", "b", "lambda_")
    b = parse_rational(args.b)
    pair = seed_pair_search(args.delta, b, parse_unit(args.lambda_), budget=args.seed_budget)
    # seeds are chosen with |f_1'(R_1(xi))| in (1/2, 9/10], i.e. for the degree-one maps
    k = args.k if args.k is not None else 1
    cert = covering_easy_even(pair.first.field, pair.second.field, k, b)
    if not cert.holds:
        raise errors.CertificationFailed("covering inequality fails", witness=cert.to_json())
    lines = [f"holds = {cert.holds}"] + [f"{name}: {mpmath.nstr(v, 12)} vs half arc {mpmath.nstr(cert.arc_length / 2, 12)}"
                                         for name, v in cert.image_lengths.items()]
    return lines, {"certificate": cert.to_json(), "seeds": pair.to_json()}, []


def cmd_reduce(args):
    from .ising import partition_function
    from .reduction import Oracle, partition_via_oracle

    _need(args, "graph", "lambda_", "b")
    G = load_graph(args.graph)
    lam = parse_unit(args.lambda_)
    bhat = parse_rational(args.b)
    oracle = Oracle(args.noise, seed=args.seed, record=True)
    if args.mode == "gadget":
        return _reduce_gadget(G, lam, bhat, oracle, args)
    res = partition_via_oracle(G, lam, bhat, oracle, record=True)
    truth = partition_function(G, lam, bhat)[()]
    result = {"Z": format_gaussian(res.value), "matches_exact_evaluation": res.value == truth,
              "oracle_calls": res.calls, "worst_theta_error_over_400kappa": repr(res.worst_error_ratio)}
    if res.value != truth:
        raise errors.CertificationFailed("oracle reconstruction differs from exact evaluation",
                                         witness=format_gaussian(res.value))
    lines = [f"Z = {format_gaussian(res.value)}", f"oracle calls = {res.calls}",
             f"worst theta error / 400 kappa = {res.worst_error_ratio:.3g}"]
    return lines, result, res.transcript + [{"oracle": oracle.transcript}]


def _reduce_gadget(G, lam, b, oracle, args):
    """Compare gadget-built probes with ideal probes on the first edge."""
    from .ising import RootedTree
    from .reduction import GadgetProbe, IdealProbe, ReductionParams, subdivision_coefficients

    u, v, _ = G.edges[0]
    n, m = G.n, sum(k for *_, k in G.edges)
    params = ReductionParams.custom(n, m, lam, b, Fraction(1, 2), k=2)
    t, r = subdivision_coefficients(G, (u, v), lam, b, "plain")
    ideal = IdealProbe(t, r, oracle, 128)
    gp = GadgetProbe(G, (u, v), params, b, oracle, T0=None)
    rows, worst = [], 0.0
    for th in (Fraction(1, 3), Fraction(1), Fraction(2), Fraction(4)):
        got = gp.normalised_value(th)
        want = complex(ideal.value(th))
        d = abs(got - want)
        worst = max(worst, d)
        rows.append({"theta": str(th), "gadget": repr(got), "ideal": repr(want), "difference": repr(d),
                     "tree_size": gp.last_tree.tree.size})
    bound = float(params.epsilon2)
    if worst > bound:
        raise errors.CertificationFailed("gadget probe outside the epsilon_2 budget", witness=rows)
    lines = [f"worst |gadget - ideal| = {worst:.3g} <= epsilon_2 = {bound:.3g}"]
    return lines, {"worst_difference": repr(worst), "epsilon2": repr(bound), "probes": rows}, []


def cmd_matchings(args):
    from .minusone import (
        count_perfect_matchings,
        matching_chain,
        matching_normalizer,
        odd_subgraph_polynomial,
        partition_minusone,
        resolve_normalizer_exponent,
    )
    from .ising import partition_bruteforce

    _need(args, "graph", "b")
    G = load_graph(args.graph)
    b = parse_rational(args.b)
    poly = odd_subgraph_polynomial(G)
    Z = partition_minusone(G, b)
    pm = count_perfect_matchings(G)
    result = {"odd_subgraph_coefficients": poly.coefficients, "Z_minus_one": str(Z),
              "perfect_matchings": pm.count, "fingerprint": pm.fingerprint}
    lines = [f"odd subgraph coefficients = {poly.coefficients}", f"Z(-1, {b}) = {Z}",
             f"perfect matchings = {pm.count}"]
    ledger = []
    if args.check_chain:
        if G.max_degree() > 3:
            raise errors.DegreeViolation("--check-chain needs maximum degree at most 3")
        ch = matching_chain(G, b)
        n, m = G.n, sum(k for *_, k in G.edges)
        exponent = resolve_normalizer_exponent(b)
        via_chain = matching_normalizer(n, m, b) * ch["M3"]
        ledger = [
            {"identity": "#odd(G) = |M(G')|", "lhs": ch["odd"], "rhs": ch["M1"]},
            {"identity": "|M(G'')| = sum p^|M∩ext| q^(m-|M∩ext|)", "lhs": ch["M2"], "rhs": ch["weighted_M1"]},
            {"identity": "|M(G''')| = |M(G'')|", "lhs": ch["M3"], "rhs": ch["M2"]},
            {"identity": f"Z = 2^n ((1+b)/2)^m q^({'-' if exponent < 0 else ''}m) |M'''|", "lhs": str(Z), "rhs": str(via_chain)},
        ]
        if G.n <= 16:
            ledger.append({"identity": "Z = brute force", "lhs": str(Z),
                           "rhs": str(partition_bruteforce(G, -1, b).re)})
        for row in ledger:
            row["holds"] = row["lhs"] == row["rhs"]
        result["chain"] = {"sizes": ch["sizes"], "p": ch["p"], "q": ch["q"], "normalizer_exponent_sign": exponent}
        lines += [f"{row['identity']}: {'ok' if row['holds'] else 'FAILED'}" for row in ledger]
        if not all(row["holds"] for row in ledger):
            raise errors.CertificationFailed("matching chain identity failed", witness=ledger)
    return lines, result, ledger


COMMANDS = {
    "eval": cmd_eval,
    "field": cmd_field,
    "orbit": cmd_orbit,
    "zeros": cmd_zeros,
    "threshold": cmd_threshold,
    "cover": cmd_cover,
    "reduce": cmd_reduce,
    "matchings": cmd_matchings,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="isingcircle", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--graph", help="graph file in the canonical JSON format")
    p.add_argument("--lambda", dest="lambda_", help="field, e.g. i, 3/5+4/5 i or pi/3")
    p.add_argument("--b", help="edge interaction, rational in (0, 1)")
    p.add_argument("--delta", type=int, help="maximum degree")
    p.add_argument("--target", help="target field on the unit circle")
    p.add_argument("--eps", help="accuracy")
    p.add_argument("--seed-budget", type=int, default=400, help="candidate trees examined in seed search")
    p.add_argument("--k", type=int, help="map degree")
    p.add_argument("--z0", help="orbit start on the unit circle")
    p.add_argument("--n", type=int, help="orbit length")
    p.add_argument("--mode", choices=["ideal", "gadget"], default="ideal")
    p.add_argument("--noise", choices=["exact", "factor", "adversarial"], default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check-chain", action="store_true")
    p.add_argument("--check", action="store_true", help="eval: also compare with brute force")
    p.add_argument("--kind", choices=["linear", "easy_even"], default="linear", help="cover certificate type")
    p.add_argument("--alpha", default="3/5", help="cover: contraction ratio of the linear maps")
    p.add_argument("--interval", default="0.42,0.44", help="cover: target interval lo,hi")
    p.add_argument("--dot", help="field: write the DOT tree here instead of stdout")
    p.add_argument("--tree-json", help="field: also write the expanded tree as graph JSON")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--transcript", help="also write the JSON document to this path")
    return p


def resolved_config(args) -> dict:
    cfg = {k.rstrip("_"): v for k, v in sorted(vars(args).items()) if k not in ("format", "transcript", "dot", "tree_json")}
    cfg["precision_bits"] = DEFAULT_PREC
    return cfg


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = resolved_config(args)
    status, payload = EXIT_OK, {}
    lines: list = []
    try:
        lines, result, transcript = COMMANDS[args.command](args)
        payload = {"status": "ok", "result": result, "transcript": transcript}
    except UsageError as exc:
        sys.stderr.write(f"isingcircle: {exc}\n")
        return EXIT_USAGE
    except _USAGE_ERRORS as exc:
        status, payload = EXIT_USAGE, {"status": "error", "error": type(exc).__name__, "message": str(exc)}
    except _CERT_ERRORS as exc:
        status = EXIT_CERT
        payload = {"status": "certificate-failure", "error": type(exc).__name__, "message": str(exc),
                   "witness": getattr(exc, "witness", None)}
    except _BUDGET_ERRORS as exc:
        status = EXIT_BUDGET
        payload = {"status": "budget-exceeded", "error": type(exc).__name__, "message": str(exc),
                   "diagnostics": getattr(exc, "diagnostics", None)}
    document = _jsonable({"command": args.command, "config": config, **payload})
    text = json.dumps(document, indent=2, sort_keys=True)
    if args.transcript:
        with open(args.transcript, "w") as fh:
            fh.write(text + "\n")
    if status != EXIT_OK:
        sys.stderr.write(f"isingcircle: {payload['error']}: {payload['message']}\n")
    if args.format == "json":
        print(text)
    elif status == EXIT_OK:
        print("\n".join(lines))
    return status


if __name__ == "__main__":
    raise SystemExit(main())
