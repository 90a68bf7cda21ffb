"""Command-line front end: ``qdm <command> <input.toric> [options]``.

Exit codes: 0 success, 1 parse error, 2 validation error, 3 invariant
failure, 4 non-nef input on mirror stages.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import render
from .cohomology import DimensionMismatch
from .floer import FloerCycle, PPoly
from .io import InputError, load_input, parse_cutoff
from .mirror import NefViolated
from .pipeline import run_pipeline, verify_suite
from .series import QSeries, SeriesError
from .toric import ToricError, validate_fan, validate_gale

COMMANDS = ("validate", "ring", "jfun", "pf", "connection", "canonical", "mirror", "qh",
            "pairing", "check")

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_INVARIANT, EXIT_NEF = 0, 1, 2, 3, 4


class _ParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qdm", description="Quantum D-modules of toric superspaces.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("input", help="path to a .toric file")
    p.add_argument("--cutoff", help="box cutoff, e.g. 3,4 or q1=3,q2=4")
    p.add_argument("--lambda", dest="lambda_mode", choices=("zero", "symbolic"),
                   help="treat the fiber weight lambda as zero or as a symbol")
    p.add_argument("--format", choices=("table", "structured"), default="table")
    p.add_argument("--degree", help="pf: curve degree d, e.g. 1,0 (default: each q^a)")
    return p


def _class_combination(ring, column_series: list[tuple[int, QSeries]]) -> str:
    terms = []
    for k, s in column_series:
        for d, v in s.items():
            for (h, l), c in v.items():
                f = render._q_factors(d, [f"q{a + 1}" for a in range(s.r)])
                f += render._laurent_factors(h, l)
                if k:
                    f.append(ring.monomial_name(k))
                terms.append((c, f))
    return render._join_terms(terms)


class _Out:
    def __init__(self, fmt: str):
        self.fmt = fmt
        self.lines: list[str] = []
        self.data: dict = {}

    def section(self, title: str):
        if self.lines:
            self.lines.append("")
        self.lines.append(f"== {title}")

    def text(self, s: str):
        self.lines.extend(s.split("\n"))

    def put(self, key: str, value):
        if isinstance(value, (render.Laurent, render.QSeries, render.MatrixSeries)):
            value = render.to_structured(value)
        self.data[key] = value

    def emit(self, stream):
        if self.fmt == "structured":
            stream.write(json.dumps(self.data, sort_keys=True, indent=1) + "\n")
        else:
            stream.write("\n".join(self.lines) + "\n")


def _labels(ring) -> list[str]:
    return [ring.monomial_name(i) for i in range(ring.dim)]


def _matrix(out: _Out, key: str, title: str, m, ring):
    out.section(f"{title}  [basis {', '.join(_labels(ring))}]")
    out.text(render.format_matrix(m))
    out.put(key, m)


def _cmd_validate(out, inp, space):
    fan = validate_fan(space.rays, space.max_cones, strict=False)
    gale = validate_gale(space.rays, space.m, space.max_cones, strict=False)
    out.section(f"validate {inp.name}".rstrip())
    out.text(str(fan))
    out.text(str(gale))
    out.text("nonfaces: " + ", ".join("{" + ",".join(map(str, sorted(s))) + "}"
                                      for s in space.nonfaces()))
    out.text("deg q: " + ", ".join(map(str, space.deg_q)))
    out.put("checks", {**fan.checks, **gale.checks})
    out.put("nonfaces", [sorted(s) for s in space.nonfaces()])
    out.put("deg_q", list(space.deg_q))


def _cmd_ring(out, art):
    ring = art.ring
    out.section("basis")
    out.text(render.format_table([[str(i), ring.monomial_name(i), str(ring.degrees[i])]
                                  for i in range(ring.dim)], ["i", "T_i", "deg"]))
    out.section("relations")
    out.text("\n".join(ring.describe_relations()) or "none")
    out.section("pairing")
    out.text(render.format_table([[render.format_laurent(art.pairing[i, j])
                                   for j in range(ring.dim)] for i in range(ring.dim)]))
    out.put("basis", _labels(ring))
    out.put("degrees", ring.degrees)
    out.put("relations", ring.describe_relations())
    out.put("pairing", [[render.to_structured(art.pairing[i, j]) for j in range(ring.dim)]
                        for i in range(ring.dim)])


def _cmd_jfun(out, art):
    prefactor, j = art.floer.j_function(art.box)
    out.section("J = " + prefactor + " * J_vec")
    out.text(render.format_matrix(j, labels=_labels(art.ring)))
    out.put("prefactor", prefactor)
    out.put("J", j)


def _cmd_pf(out, art, degree):
    fm = art.floer
    r = art.space.r
    degrees = [degree] if degree else [tuple(1 if b == a else 0 for b in range(r))
                                       for a in range(r)]
    rows = []
    records = []
    for d in degrees:
        left, right = fm.picard_fuchs_relation(d)
        ok = fm.verify_pf((left, right), art.box)
        rows.append([str(tuple(d)), f"{left} = {right}", "pass" if ok else "FAIL"])
        records.append({"d": list(d), "left": str(left), "right": str(right), "ok": bool(ok)})
    out.section("Picard-Fuchs relations")
    out.text(render.format_table(rows, ["d", "relation", "check"]))
    out.put("relations", records)
    return all(r["ok"] for r in records)


def _cmd_connection(out, art):
    for a, om in enumerate(art.connection.omegas):
        _matrix(out, f"Omega_{a + 1}", f"Omega_{a + 1}", om, art.ring)


def _cmd_canonical(out, art):
    _matrix(out, "S_plus", "S_plus", art.birkhoff.plus, art.ring)
    for a, om in enumerate(art.canonical.omegas):
        _matrix(out, f"Omega_hat_{a + 1}", f"Omega_hat_{a + 1}", om, art.ring)


def _cmd_mirror(out, art):
    md = art.mirror
    out.section("mirror map (log q = log qhat + delta(qhat))")
    for a, dl in enumerate(md.delta):
        out.text(f"delta{a + 1} = {render.format_series(dl)}")
        out.put(f"delta_{a + 1}", dl)
    for a, e in enumerate(md.forward()):
        out.text(f"q{a + 1}/qhat{a + 1} = {render.format_series(e)}")
    out.section("inverse (log qhat = log q + eps(q))")
    for a, e in enumerate(md.eps):
        out.text(f"eps{a + 1} = {render.format_series(e)}")
        out.put(f"eps_{a + 1}", e)
    out.section("potential and normalization")
    out.text(f"F(q) = {render.format_series(md.F)}")
    out.text(f"F(qhat) = {render.format_series(md.F_hat)}")
    out.text(f"f(q) = {render.format_series(md.f)}")
    out.text(f"f(qhat) = {render.format_series(md.f_hat)}")
    out.put("F", md.F)
    out.put("F_hat", md.F_hat)
    out.put("f", md.f)
    out.put("f_hat", md.f_hat)


def _cmd_qh(out, art):
    ring = art.ring

    def product_name(a, j):
        tj = ring.monomial_name(j)
        return f"p{a} * " + (f"({tj})" if "*" in tj else tj)

    for a, om in enumerate(art.flat.omegas):
        _matrix(out, f"Omega_flat_{a + 1}", f"flat Omega_{a + 1} (qhat)", om, ring)
    out.section("quantum products")
    rows = []
    products = {}
    for a in range(1, art.space.r + 1):
        for j in range(ring.dim):
            expr = _class_combination(ring, art.table.product(a, j))
            name = product_name(a, j)
            rows.append([name, expr])
            products[name] = expr
    out.text(render.format_table(rows))
    out.put("products", products)
    out.section("paired values <p_a * T_j, T_k>")
    for a, pm in enumerate(art.table.paired):
        for j in range(ring.dim):
            for k in range(ring.dim):
                s = pm.entry(k, j)
                if s:
                    out.text(f"<{product_name(a + 1, j)}, {ring.monomial_name(k)}> = "
                             f"{render.format_series(s)}")
        out.put(f"paired_{a + 1}", pm)


def _cmd_pairing(out, art):
    frame = art.floer.frame_pairing(art.sinv, render.np.asarray(art.pairing))
    _matrix(out, "pairing", "(T_i Delta-bar, T_j Delta)", frame, art.ring)


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _ParseError as exc:
        stderr.write(f"qdm: {exc}\n")
        return EXIT_PARSE
    try:
        inp = load_input(args.input)
    except InputError as exc:
        stderr.write(f"qdm: {exc}\n")
        return EXIT_PARSE
    try:
        space = inp.superspace()
    except ToricError as exc:
        stderr.write(f"qdm: validation error: {exc}\n")
        return EXIT_VALIDATION
    try:
        if args.cutoff:
            box = parse_cutoff(args.cutoff, space.r)
        else:
            box = inp.cutoff or tuple(3 for _ in range(space.r))
            if len(box) != space.r:
                raise InputError(f"cutoff needs {space.r} entries")
        degree = parse_cutoff(args.degree, space.r) if args.degree else None
    except InputError as exc:
        stderr.write(f"qdm: {exc}\n")
        return EXIT_PARSE
    mode = args.lambda_mode or inp.lambda_mode
    out = _Out(args.format)
    out.put("command", args.command)
    out.put("cutoff", list(box))
    out.put("lambda", mode)

    stage = {"validate": "ring", "ring": "ring", "jfun": "ring", "pf": "ring",
             "pairing": "sinv", "connection": "connection", "canonical": "canonical",
             "mirror": "mirror", "qh": "flat", "check": "flat"}[args.command]
    code = EXIT_OK
    try:
        if args.command == "validate":
            _cmd_validate(out, inp, space)
            out.emit(stdout)
            return EXIT_OK
        art = run_pipeline(space, box, mode, until=stage,
                           strict_mirror=args.command in ("mirror", "qh"))
        cmd = args.command
        if cmd == "ring":
            _cmd_ring(out, art)
        elif cmd == "jfun":
            _cmd_jfun(out, art)
        elif cmd == "pf":
            if not _cmd_pf(out, art, degree):
                code = EXIT_INVARIANT
        elif cmd == "connection":
            _cmd_connection(out, art)
        elif cmd == "canonical":
            _cmd_canonical(out, art)
        elif cmd == "mirror":
            _cmd_mirror(out, art)
        elif cmd == "qh":
            _cmd_qh(out, art)
        elif cmd == "pairing":
            _cmd_pairing(out, art)
        elif cmd == "check":
            rep = verify_suite(art)
            out.section("invariants")
            out.text("\n".join(rep.lines()))
            out.put("checks", rep.checks)
            out.put("skipped", rep.skipped)
            if not rep.ok:
                out.put("failed", rep.failed)
                code = EXIT_INVARIANT
    except NefViolated as exc:
        stderr.write(f"qdm: {exc}\n")
        return EXIT_NEF
    except DimensionMismatch as exc:
        stderr.write(f"qdm: validation error: {exc}\n")
        return EXIT_VALIDATION
    except SeriesError as exc:
        stderr.write(f"qdm: invariant failure: {exc}\n")
        return EXIT_INVARIANT
    out.emit(stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
