"""Command line front end: ``ncergo {validate,gauge,maximize,analyze,herman} FILE``.

Exit codes: 0 success, 1 bad input or violated precondition, 2 numerical
failure or an inconsistent Herman report.
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import TextIO

import numpy as np

from .algebra import Element
from .averaging import fixed_point_projection
from .dynamics import FolnerSchedule, validate_action
from .errors import NumericalFailure
from .io import SystemFile, load_system
from .optimization import (
    Annihilator,
    FiniteHull,
    InvariantStates,
    InvariantTracialStates,
    fixed_algebra_analysis,
    gauge,
    herman_check,
    m_value,
    unique_ergodicity,
)

REPORT_HEADER = "ncergo-report/1"
SEMINORM_TAIL = 4


def fmt(x: float) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return format(float(x) + 0.0, ".17g")


def fmt_bool(b: bool) -> str:
    return "true" if b else "false"


def fmt_complex(z: complex) -> str:
    return f"[{fmt(z.real)}, {fmt(z.imag)}]"


def fmt_blocks(blocks) -> str:
    out = []
    for b in blocks:
        rows = ", ".join("[" + ", ".join(fmt_complex(z) for z in row) + "]" for row in np.asarray(b))
        out.append("[" + rows + "]")
    return "[" + ", ".join(out) + "]"


class InputError(ValueError):
    pass


def _load_valid(path: str, out: TextIO) -> SystemFile:
    system = load_system(path)
    report = validate_action(system.action)
    if not report.valid:
        for line in report.violations:
            print(line, file=out)
        raise InputError(f"invalid action (max violation {fmt(report.max_violation)})")
    return system


def _observable(system: SystemFile, name: str) -> Element:
    if name not in system.observables:
        raise InputError(f"unknown observable {name!r}; available: {sorted(system.observables)}")
    return system.observables[name]


def cmd_validate(args, out: TextIO) -> int:
    system = load_system(args.file)
    report = validate_action(system.action)
    print(REPORT_HEADER, file=out)
    if report.valid:
        print("VALID", file=out)
        print(f"max_violation: {fmt(report.max_violation)}", file=out)
        return 0
    print("INVALID", file=out)
    for line in report.violations:
        print(line, file=out)
    return 1


def cmd_gauge(args, out: TextIO) -> int:
    system = _load_valid(args.file, out)
    a = _observable(system, args.observable)
    action = system.action
    schedule = FolnerSchedule(action.presentation)
    rep = gauge(action, schedule, a, args.kmax)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "gamma_k", "defect_k", "diag_k"])
            for k, (g, d, s) in enumerate(zip(rep.gammas, rep.defects, rep.distances), start=1):
                w.writerow([k, fmt(g), fmt(d), fmt(s)])
    print(REPORT_HEADER, file=out)
    print(f"observable: {args.observable}", file=out)
    print(f"kmax: {args.kmax}", file=out)
    print(f"gamma_kmax: {fmt(rep.gammas[-1])}", file=out)
    print(f"inf_gamma: {fmt(rep.infimum)}", file=out)
    if rep.subadditive is not None:
        print(f"subadditive: {fmt_bool(rep.subadditive)}", file=out)
    print(f"envelope_ok: {fmt_bool(rep.envelope_ok)}", file=out)
    gamma, m = rep.limit, rep.m
    print(f"Gamma = {fmt(gamma)}, m = {fmt(m)}, |Gamma - m| = {fmt(abs(gamma - m))}", file=out)
    return 0


SET_NAMES = ("SG", "TG", "ann")


def cmd_maximize(args, out: TextIO) -> int:
    system = _load_valid(args.file, out)
    a = _observable(system, args.observable)
    if args.set == "SG":
        descriptor = InvariantStates()
    elif args.set == "TG":
        descriptor = InvariantTracialStates()
    else:
        if system.ideal is None:
            raise InputError("--set ann needs an \"ideal\" entry in the system file")
        descriptor = Annihilator(system.ideal)
    rep = m_value(system.action, a, descriptor)
    print(REPORT_HEADER, file=out)
    print(f"observable: {args.observable}", file=out)
    print(f"set: {args.set}", file=out)
    print(f"m: {fmt(rep.value)}", file=out)
    print(f"certificate: {fmt_blocks(rep.certificate.densities)}", file=out)
    face = rep.face
    print(f"face: {face.kind}", file=out)
    if face.projector is not None:
        print(f"face_multiplicity: {face.multiplicity}", file=out)
        print(f"face_projector: {fmt_blocks(face.projector.blocks)}", file=out)
    if face.vertex_weights is not None:
        print("face_vertices: [" + ", ".join(fmt(w) for w in face.vertex_weights) + "]", file=out)
    return 0


def cmd_analyze(args, out: TextIO) -> int:
    system = _load_valid(args.file, out)
    action = system.action
    P = fixed_point_projection(action)
    fa = fixed_algebra_analysis(action, P)
    ue = unique_ergodicity(action, projection=P)
    print(REPORT_HEADER, file=out)
    print(f"dim_fixed: {fa.dimension}", file=out)
    print(f"abelian: {fmt_bool(fa.abelian)}", file=out)
    print(f"unique: {fmt_bool(ue.unique)}", file=out)
    print(f"strict: {fmt_bool(ue.strict)}", file=out)
    if ue.unique:
        print(f"invariant_state: {fmt_blocks(ue.invariant_state.densities)}", file=out)
    if fa.minimal_projections is not None:
        for j, p in enumerate(fa.minimal_projections):
            print(f"minimal_projection[{j}]: {fmt_blocks(p.blocks)}", file=out)
    return 0


def cmd_herman(args, out: TextIO) -> int:
    system = _load_valid(args.file, out)
    x = _observable(system, args.observable)
    if not x.is_self_adjoint():
        raise InputError(f"observable {args.observable!r} is not self-adjoint")
    names = args.states or ["all"]
    if names == ["all"]:
        states = InvariantStates()
    else:
        missing = [n for n in names if n not in system.states]
        if missing:
            raise InputError(f"unknown states {missing}; available: {sorted(system.states)}")
        states = FiniteHull(tuple(system.states[n] for n in names))
    action = system.action
    rep = herman_check(action, FolnerSchedule(action.presentation), states, x, args.lam, args.kmax)
    print(REPORT_HEADER, file=out)
    print(f"observable: {args.observable}", file=out)
    print(f"states: {' '.join(names)}", file=out)
    print(f"lambda: {fmt(rep.lam)}", file=out)
    print(f"interval: [{fmt(rep.interval[0])}, {fmt(rep.interval[1])}]", file=out)
    print(f"spectrum_singleton: {fmt_bool(rep.spectrum_singleton)}", file=out)
    tail = rep.seminorm_sequence[-SEMINORM_TAIL:]
    print("seminorm_tail: [" + ", ".join(fmt(s) for s in tail) + "]", file=out)
    print(f"seminorm_converges: {fmt_bool(rep.seminorm_converges)}", file=out)
    if rep.consistent:
        print("CONSISTENT", file=out)
        return 0
    print("INCONSISTENT", file=out)
    return 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ncergo", description="Ergodic optimization on finite-dimensional C*-dynamical systems")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check unitarity, block sizes and group relations")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("gauge", help="gauge sequence of a positive observable")
    g.add_argument("file")
    g.add_argument("--observable", required=True)
    g.add_argument("--kmax", type=int, default=1024)
    g.add_argument("--out", help="CSV path for the per-k sequence")
    g.set_defaults(func=cmd_gauge)

    m = sub.add_parser("maximize", help="ergodic optimization value and a maximizing state")
    m.add_argument("file")
    m.add_argument("--observable", required=True)
    m.add_argument("--set", choices=SET_NAMES, default="SG")
    m.set_defaults(func=cmd_maximize)

    a = sub.add_parser("analyze", help="fixed-point algebra and unique ergodicity")
    a.add_argument("file")
    a.set_defaults(func=cmd_analyze)

    h = sub.add_parser("herman", help="compare limit values with seminorm convergence")
    h.add_argument("file")
    h.add_argument("--observable", required=True)
    h.add_argument("--lambda", dest="lam", type=float, default=None)
    h.add_argument("--states", nargs="+", help="state names from the file, or 'all'")
    h.add_argument("--kmax", type=int, default=1024)
    h.set_defaults(func=cmd_herman)
    return p


def main(argv=None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        print(f"error: numerical failure: {exc}", file=err)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
