"""Command-line surface and reproducible check harness.

Every command prints a machine-readable JSON report on stdout and a
one-line human summary on stderr.  Exit codes: 0 all checks pass, 1 a
check failed, 2 unknown subcommand, 3 malformed input.
"""

import argparse
import hashlib
import json
import random
import sys
import time
from fractions import Fraction
from itertools import product

from .tensor import GradedBasis, NCFunctional, word_degree
from .model import (FreeBVModel, Kernel, _random_symmetric_kernel,
                    synthetic_homotopy_triple, zeros)
from . import bv
from . import ribbon
from . import largen
from .flow import Truncation, rg_flow, compose_flow, qme_flow_check


def reference_model(dim):
    """Fixed exact models used by the seeded checks."""
    if dim == 2:
        return FreeBVModel(GradedBasis(["x", "y"], [0, 1]),
                           [[0, 1], [-1, 0]], [[0, 0], [0, 0]])
    if dim == 4:
        return FreeBVModel(
            GradedBasis(["a", "b", "c", "d"], [0, 1, -1, 2]),
            [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]],
            [[0, 0, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 1, 0, 0]])
    raise ValueError("no reference model of dimension %d" % dim)


def degree_zero_words(m, length, p_max, l_max):
    out = []
    for w in product(range(m.dim), repeat=length):
        if word_degree(m.basis, w) != 0:
            continue
        F = NCFunctional(m.basis, p_max, l_max)
        F.add_term(0, 0, [w], 1)
        if not F.is_zero():
            out.append(w)
    return out


def seeded_interaction(m, rng, t):
    """Random interaction with a fixed cubic+quartic shape profile."""
    w3 = degree_zero_words(m, 3, t.p_max, t.l_max)
    w4 = degree_zero_words(m, 4, t.p_max, t.l_max)
    out = NCFunctional(m.basis, t.p_max, t.l_max)
    while out.is_zero():
        for _ in range(2):
            out.add_term(0, 0, [rng.choice(w3)],
                         Fraction(rng.randint(-3, 3), rng.randint(1, 2)))
        out.add_term(0, 0, [rng.choice(w4)],
                     Fraction(rng.randint(-3, 3), rng.randint(1, 2)))
    return out


def _report(data, summary, code):
    blob = json.dumps(data, sort_keys=True, indent=1)
    data["digest"] = hashlib.sha256(blob.encode()).hexdigest()[:16]
    print(json.dumps(data, sort_keys=True, indent=1))
    print(summary, file=sys.stderr)
    return code


def _check_report(cmd, checks, elapsed):
    ok = all(c["pass"] for c in checks)
    data = {"command": cmd, "checks": checks, "pass": ok,
            "seconds": round(elapsed, 3)}
    npass = sum(c["pass"] for c in checks)
    return _report(data, "%s: %d/%d checks passed (%.1fs)"
                   % (cmd, npass, len(checks), elapsed), 0 if ok else 1)


# -- graphs ------------------------------------------------------------------

def _cs_filter(shape):
    genus, boundary, cycles = shape
    return genus == 0 and boundary == 0 and tuple(cycles) == (3,)


def cmd_graphs_enumerate(args):
    vf = _cs_filter if args.cs_vertices else None
    t0 = time.time()
    classes = []
    for ic in ribbon.enumerate_graphs(args.loops, args.legs, vertex_filter=vf):
        inv = ribbon.graph_invariants(ic.canonical)
        classes.append({"aut_order": ic.aut_order, "B": inv.B, "g": inv.g,
                        "b": inv.b, "ell": inv.ell, "betti1": inv.betti1})
    data = {"command": "graphs enumerate", "loops": args.loops,
            "legs": args.legs, "count": len(classes), "classes": classes,
            "seconds": round(time.time() - t0, 3)}
    return _report(data, "enumerated %d classes" % len(classes), 0)


def _load_graph(path):
    try:
        with open(path) as fh:
            return ribbon.graph_from_json(fh.read())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(json.dumps({"error": str(exc)}))
        print("malformed graph input: %s" % exc, file=sys.stderr)
        return None


def cmd_graphs_invariants(args):
    G = _load_graph(args.file)
    if G is None:
        return 3
    errs = ribbon.validate_graph(G)
    if errs:
        print(json.dumps({"error": errs}))
        print("invalid graph: %s" % errs[0], file=sys.stderr)
        return 3
    inv = ribbon.graph_invariants(G)
    data = {"command": "graphs invariants", "B": inv.B, "g": inv.g,
            "b": inv.b, "ell": inv.ell, "betti1": inv.betti1}
    return _report(data, "ell=%d g=%d B=%d" % (inv.ell, inv.g, inv.B), 0)


def cmd_graphs_contract(args):
    G = _load_graph(args.file)
    if G is None:
        return 3
    if ribbon.validate_graph(G):
        print(json.dumps({"error": "invalid graph"}))
        print("invalid graph", file=sys.stderr)
        return 3
    before = ribbon.graph_invariants(G)
    steps = []
    while True:
        edge = next(iter(sorted(G.edges(), key=str)), None)
        if edge is None:
            break
        G = ribbon.contract_edge(G, edge)
        inv = ribbon.graph_invariants(G)
        steps.append({"edge": [str(edge[0]), str(edge[1])],
                      "g": inv.g, "B": inv.B, "b": inv.b, "ell": inv.ell})
    preserved = all(s["g"] == before.g and s["B"] == before.B
                    and s["b"] == before.b for s in steps)
    out_fmt = ribbon.graph_to_dot(G) if args.format == "dot" \
        else ribbon.graph_to_json(ribbon.canonicalize(G).canonical)
    data = {"command": "graphs contract", "steps": steps,
            "invariants_preserved": preserved, "result": out_fmt}
    return _report(data, "contracted %d edges, invariants %s"
                   % (len(steps), "preserved" if preserved else "CHANGED"),
                   0 if preserved else 1)


# -- flow --------------------------------------------------------------------

def cmd_flow_run(args):
    m = reference_model(args.dim)
    rng = random.Random(args.seed)
    t = Truncation(args.pmax, args.lmax)
    I = seeded_interaction(m, rng, t)
    P = _random_symmetric_kernel(m, 0, rng)
    t0 = time.time()
    W = rg_flow(I, P, t)
    data = {"command": "flow run", "dim": args.dim, "seed": args.seed,
            "pmax": args.pmax, "lmax": args.lmax,
            "interaction": json.loads(I.to_json()),
            "flowed": json.loads(W.to_json()),
            "seconds": round(time.time() - t0, 3)}
    return _report(data, "flowed %d terms into %d terms"
                   % (len(I.terms), len(W.terms)), 0)


# -- checks ------------------------------------------------------------------

def cmd_check_semigroup(args):
    m = reference_model(args.dim)
    t = Truncation(args.pmax, args.lmax)
    t0 = time.time()
    checks = []
    for s in range(args.seed, args.seed + 1):
        rng = random.Random(s)
        I = seeded_interaction(m, rng, t)
        P1 = _random_symmetric_kernel(m, 0, rng)
        P2 = _random_symmetric_kernel(m, 0, rng)
        lhs = rg_flow(I, P1 + P2, t)
        rhs = compose_flow(I, P1, P2, t)
        d = lhs - rhs
        checks.append({"name": "semigroup seed %d" % s,
                       "pass": d.is_zero(), "residual_terms": len(d.terms)})
        Z = Kernel(zeros(m.dim), 0)
        checks.append({"name": "identity seed %d" % s,
                       "pass": rg_flow(I, Z, t) == I})
    return _check_report("check semigroup", checks, time.time() - t0)


def cmd_check_qme_flow(args):
    m = reference_model(4)
    t = Truncation(min(args.pmax, 1), args.lmax)
    t0 = time.time()
    checks = []
    for s in range(args.seed, args.seed + 3):
        rng = random.Random(s)
        I = seeded_interaction(m, rng, t)
        trip = synthetic_homotopy_triple(m, s)
        lhs, rhs, res = qme_flow_check(I, trip, t, m)
        checks.append({"name": "qme flow seed %d" % s,
                       "pass": res.is_zero(), "residual_terms": len(res.terms)})
    return _check_report("check qme-flow", checks, time.time() - t0)


def _bv_instance(m, rng, p_max=2, l_max=8):
    while True:
        L = rng.randint(1, 3)
        w = tuple(rng.randrange(m.dim) for _ in range(L))
        F = NCFunctional(m.basis, p_max, l_max)
        F.add_term(0, 0, [w], rng.choice([1, 2, -1]))
        if not F.is_zero():
            return F, word_degree(m.basis, w) & 1


def bv_axiom_failures(m, rng):
    """One seeded instance of the BV identity suite; returns failing names."""
    if rng.random() < 0.5:
        K = m.differential_on_kernel(_random_symmetric_kernel(m, 0, rng))
    else:
        K = _random_symmetric_kernel(m, 1, rng)
    f, pf = _bv_instance(m, rng)
    g, pg = _bv_instance(m, rng)
    h, ph = _bv_instance(m, rng)
    fails = []
    lap = lambda x: bv.bv_laplacian(x, K)[0]
    br = lambda x, y: bv.bracket(x, y, K)
    if not lap(lap(f)).is_zero():
        fails.append("laplacian squares to zero")
    DK = m.differential_on_kernel(K)
    comm = bv.q_action(m, lap(f)) + lap(bv.q_action(m, f))
    if not (comm + bv.bv_laplacian(f, DK)[0]).is_zero():
        fails.append("differential commutes with the laplacian")
    sym = br(g, f).scale(-1 if pf & pg else 1)
    if br(f, g) != sym:
        fails.append("bracket symmetry")
    jac = (br(f, br(g, h))
           - br(br(f, g), h).scale(-1 if pf ^ 1 else 1)
           - br(g, br(f, h)).scale(-1 if (pf ^ 1) & (pg ^ 1) else 1))
    if not jac.is_zero():
        fails.append("odd jacobi")
    lei = (br(f, g.multiply(h)) - br(f, g).multiply(h)
           - g.multiply(br(f, h)).scale(-1 if (pf ^ 1) & pg else 1))
    if not lei.is_zero():
        fails.append("odd leibniz")
    gbr = NCFunctional(m.basis, f.p_max, f.l_max)
    for (i, j, ws), c in br(f, g).terms.items():
        gbr.add_term(i + 1, j, ws, c)
    gen = (lap(f.multiply(g)) - lap(f).multiply(g)
           - f.multiply(lap(g)).scale(-1 if pf else 1) - gbr)
    if not gen.is_zero():
        fails.append("laplacian generates the bracket")
    return fails


def cmd_check_bv_axioms(args):
    m = reference_model(args.dim)
    t0 = time.time()
    checks = []
    for s in range(args.seed, args.seed + 10):
        rng = random.Random(s)
        fails = bv_axiom_failures(m, rng)
        checks.append({"name": "bv axioms seed %d" % s,
                       "pass": not fails, "failures": fails})
    return _check_report("check bv-axioms", checks, time.time() - t0)


def cmd_check_lqt(args):
    m = reference_model(args.dim)
    t0 = time.time()
    checks = []
    w3 = degree_zero_words(m, 3, 1, args.lmax)
    for s in range(args.seed, args.seed + 5):
        rng = random.Random(s)
        I = NCFunctional(m.basis, 1, args.lmax)
        I.add_term(0, 0, [rng.choice(w3)], rng.choice([1, 2, -1]))
        wit = largen.lqt_witness(I, 4)
        ok = (wit is None) == I.is_zero()
        checks.append({"name": "lqt seed %d" % s, "pass": ok,
                       "witness": wit})
    Z = NCFunctional(m.basis, 1, args.lmax)
    checks.append({"name": "lqt zero functional",
                   "pass": largen.lqt_witness(Z, 4) is None})
    return _check_report("check lqt", checks, time.time() - t0)


def cmd_check_diagrams(args):
    m = reference_model(args.dim)
    t = Truncation(1, min(args.lmax, 4))
    t0 = time.time()
    checks = []
    A = largen.matrix_frobenius(args.frobenius)
    for s in range(args.seed, args.seed + 2):
        rng = random.Random(s)
        I = seeded_interaction(m, rng, t)
        P = _random_symmetric_kernel(m, 0, rng)
        lhs = largen.sigma_gamma_nu(rg_flow(I, P, t))
        rhs = rg_flow(largen.sigma_gamma_nu(I), P, t, "commutative")
        checks.append({"name": "sigma intertwines seed %d" % s,
                       "pass": lhs == rhs})
        PA = largen.extend_kernel(P, m, A)
        mlhs = largen.morita(rg_flow(I, P, t), A)
        mrhs = rg_flow(largen.morita(I, A), PA, t)
        checks.append({"name": "morita mat_%d intertwines seed %d"
                       % (args.frobenius, s), "pass": mlhs == mrhs})
    return _check_report("check diagrams", checks, time.time() - t0)


def cmd_check_gauge(args):
    t0 = time.time()
    checks = []
    F1, Z = Fraction(1), Fraction(0)
    instances = [
        ("trivial algebra", bv.GaugeData(
            u_letters=["e"], u_degrees=[0], mult=[[[F1]]],
            v_letters=["v"], v_degrees=[0],
            left=[[[F1]]], right=[[[F1]]], d=None)),
        ("product algebra with difference twist", bv.GaugeData(
            u_letters=["p", "q"], u_degrees=[0, 0],
            mult=[[[F1, Z], [Z, Z]], [[Z, Z], [Z, F1]]],
            v_letters=["v"], v_degrees=[0],
            left=[[[F1]], [[Z]]], right=[[[Z], [F1]]],
            d=[[F1, -F1]])),
    ]
    for name, gd in instances:
        errs = bv.validate_gauge(gd)
        checks.append({"name": "validate %s" % name, "pass": not errs,
                       "errors": errs})
        model, X, Sg, res, rep = bv.gauge_action(gd)
        cme = bv.classical_bracket(Sg, Sg, model)
        checks.append({"name": "gauge action cme %s" % name,
                       "pass": cme.is_zero() and res.is_zero()
                       and rep["satisfied"]})
    return _check_report("check gauge", checks, time.time() - t0)


# -- toy Chern-Simons --------------------------------------------------------

def cmd_cs_demo(args):
    t0 = time.time()
    A = largen.matrix_frobenius(args.frobenius)
    m = bv.cs_model(A)
    I = bv.cs_interaction(A, m, 2, 6)
    res = bv.qme_residual(I, None, "classical", m)
    checks = [{"name": "cme residual", "pass": res.is_zero()}]
    data = {"command": "cs demo", "frobenius": args.frobenius,
            "model_dim": m.dim, "interaction_terms": len(I.terms),
            "checks": checks, "pass": res.is_zero(),
            "seconds": round(time.time() - t0, 3)}
    return _report(data, "toy Chern-Simons on mat_%d: residual %s"
                   % (args.frobenius, "zero" if res.is_zero() else "NONZERO"),
                   0 if res.is_zero() else 1)


# -- argument surface --------------------------------------------------------

def _common(p, dim=4, pmax=1, lmax=4):
    p.add_argument("--pmax", type=int, default=pmax)
    p.add_argument("--lmax", type=int, default=lmax)
    p.add_argument("--dim", type=int, default=dim, choices=(2, 4))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)


def build_parser():
    top = argparse.ArgumentParser(prog="ncbv")
    sub = top.add_subparsers(dest="group")

    graphs = sub.add_parser("graphs").add_subparsers(dest="sub")
    ge = graphs.add_parser("enumerate")
    ge.add_argument("--loops", type=int, default=0)
    ge.add_argument("--legs", type=int, default=3)
    ge.add_argument("--cs-vertices", action="store_true")
    ge.set_defaults(func=cmd_graphs_enumerate)
    gi = graphs.add_parser("invariants")
    gi.add_argument("file")
    gi.set_defaults(func=cmd_graphs_invariants)
    gc = graphs.add_parser("contract")
    gc.add_argument("file")
    gc.add_argument("--format", choices=("json", "dot"), default="json")
    gc.set_defaults(func=cmd_graphs_contract)

    flow = sub.add_parser("flow").add_subparsers(dest="sub")
    fr = flow.add_parser("run")
    _common(fr)
    fr.set_defaults(func=cmd_flow_run)

    check = sub.add_parser("check").add_subparsers(dest="sub")
    for name, fn, extra in (
            ("semigroup", cmd_check_semigroup, None),
            ("qme-flow", cmd_check_qme_flow, None),
            ("bv-axioms", cmd_check_bv_axioms, None),
            ("lqt", cmd_check_lqt, None),
            ("diagrams", cmd_check_diagrams, "frobenius"),
            ("gauge", cmd_check_gauge, None)):
        cp = check.add_parser(name)
        _common(cp)
        if extra == "frobenius":
            cp.add_argument("--frobenius", type=int, default=2)
        cp.add_argument("--scales", type=float, nargs="*", default=None)
        cp.set_defaults(func=fn)

    cs = sub.add_parser("cs").add_subparsers(dest="sub")
    cd = cs.add_parser("demo")
    cd.add_argument("--frobenius", type=int, default=1)
    cd.set_defaults(func=cmd_cs_demo)
    return top


def run(argv):
    top = build_parser()
    try:
        args = top.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if not hasattr(args, "func"):
        top.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(json.dumps({"error": str(exc)}))
        print("malformed input: %s" % exc, file=sys.stderr)
        return 3


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
