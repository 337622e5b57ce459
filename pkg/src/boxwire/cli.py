"""Command-line interface: ``boxwire <command> ...``.

Exit codes: 0 success, 1 usage or input error, 2 when ``reproduce`` finds a
FAIL or FLAG cell.
"""

from __future__ import annotations

import argparse
import sys

from . import lp
from .bell import CHSH_INDICES, chsh, cost2, max_chsh, robustness2
from .box_model import CORRELATOR_NAMES, check_nonsignaling, parse_box, to_correlators
from .classes import (CUTS, ClassSpec, Cut, member_class, member_NSBL, member_S,
                      member_svetlichny, member_T2, member_TOBL)
from .errors import BoxwireError
from .quantify import (cost3_exact, cost_lower_bound, mwn_box, mwn_class, parse_direction,
                       robustness3_exact, robustness_lower_bound, signal_weight_bound, wn_class,
                       wn_levels)
from .reproduce import format_records, reproduce_tables
from .wiring import apply, format_wiring, full_wirings, parse_wiring

GRAMMAR = """\
wiring:  "x2=<poly over 1,a1,x1>; out=<poly over 1,a1,x1,a2>" with optional "in=x1|1+x1|0|1"
         a bare polynomial means out=<poly> with x2=a1, e.g. "a2+a1 a2 x1"
class:   three letters from N,T,S for cuts 1:23, 2:13, 3:12 (e.g. TTS), or T2, SVET
cut:     1:23, 2:13 or 3:12        direction: 1to2, 2to1, 1to3, ...
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{GRAMMAR}")
        raise SystemExit(1)


def _load(path):
    with open(path, encoding="utf-8") as fh:
        return parse_box(fh.read())


def _default_direction(cut: Cut) -> str:
    i, j = cut.pair
    return f"{i}to{j}"


def _print_box2(b, out):
    for a1, a2, x1, x2 in ((a1, a2, x1, x2) for x1 in (0, 1) for x2 in (0, 1)
                           for a1 in (0, 1) for a2 in (0, 1)):
        out.append(f"p({a1} {a2} | {x1} {x2}) = {b[a1, a2, x1, x2]}")


def cmd_check(args):
    b = _load(args.box)
    viol = check_nonsignaling(b)
    lines = [f"{args.box}: valid box"]
    if viol:
        lines.append(f"non-signaling: no ({len(viol)} violated equalities)")
        for v in viol:
            lines.append(f"  party {v.party} outcomes {v.outcomes} inputs {v.inputs}: "
                         f"{v.at_input0} != {v.at_input1}")
    else:
        lines.append("non-signaling: yes")
        for name, val in zip(CORRELATOR_NAMES, to_correlators(b).values):
            lines.append(f"  {name} = {val}")
    return lines, 0


def _membership_line(name, m, cert):
    lines = [f"{name}: {'member' if m.member else 'NOT member'}"]
    if cert and m.decomposition is not None:
        lines += ["  " + t for t in m.decomposition.lines()]
    return lines


def cmd_classify(args):
    b = _load(args.box)
    cls = args.cls.upper()
    cuts = [Cut.parse(args.cut)] if args.cut else list(CUTS)
    parts, details = [], []

    def add(name, m):
        parts.append(f"{name}: {'member' if m.member else 'NOT member'}")
        details.extend(_membership_line(name, m, args.certificate)[1:])

    if cls == "T2":
        add("T2", member_T2(b))
        # the finer TOBL test in the requested cut, default 3:12
        for c in ([Cut.parse(args.cut)] if args.cut else [Cut(3)]):
            add(f"TOBL cut {c}", member_TOBL(b, c))
    elif cls == "SVET":
        add("Svetlichny", member_svetlichny(b))
    elif cls in ("TOBL", "NSBL", "S"):
        oracle = {"TOBL": member_TOBL, "NSBL": member_NSBL, "S": member_S}[cls]
        for c in cuts:
            add(f"{cls} cut {c}", oracle(b, c))
    else:
        rep = member_class(b, ClassSpec.parse(cls))
        parts.append(f"{cls}: {'member' if rep.member else 'NOT member'}")
        for c, letter, m in rep.cuts:
            name = {"N": "NSBL", "T": "TOBL", "S": "S"}[letter]
            add(f"{name} cut {c}", m)
    return ["; ".join(parts)] + details, 0


def cmd_wire(args):
    b = _load(args.box)
    first, second = parse_direction(args.direction)
    w = parse_wiring(args.wiring, first, second)
    wired = apply(w, b)
    lines = [f"wiring {format_wiring(w)} on parties {first}->{second}"]
    if args.chsh == "all":
        idxs = CHSH_INDICES
    else:
        idxs = [i for i in CHSH_INDICES if str(i) == args.chsh]
        if not idxs:
            raise BoxwireError(f"CHSH index must be 'all' or three bits, not {args.chsh!r}")
    for i in idxs:
        lines.append(f"beta_{i} = {chsh(wired, i)}")
    value, idx = max_chsh(wired)
    lines.append(f"max beta = {value} at {idx}")
    if args.show_box:
        _print_box2(wired, lines)
    return lines, 0


def _cut_direction(args):
    cut = Cut.parse(args.cut)
    return cut, args.direction or _default_direction(cut)


def cmd_wn(args):
    cut, direction = _cut_direction(args)
    rec = wn_class(args.cls, cut, direction, parse_wiring(args.wiring), recheck=True)
    lines = [f"class {rec.spec} wiring {format_wiring(rec.wiring)} cut {cut} direction {direction}",
             f"max beta_000 = {rec.optimum}", f"WN = {rec.wn}"]
    if args.witness:
        lines.append("witness (correlators):")
        lines += [f"  {n} = {v}" for n, v in zip(CORRELATOR_NAMES, to_correlators(rec.witness).values)]
    return lines, 0


def cmd_mwn_class(args):
    cut, direction = _cut_direction(args)
    value, w = mwn_class(args.cls, cut, direction)
    levels = wn_levels(args.cls, cut, direction)
    lines = [f"MWN = {value}", f"witness wiring: {format_wiring(w)}",
             "WN levels: " + ", ".join(str(v) for v in levels)]
    return lines, 0


def cmd_mwn_box(args):
    b = _load(args.box)
    first, second = parse_direction(args.direction)
    m = mwn_box(b, first, second)
    note = "" if m.violation else " (no violation)"
    return [f"MWN = {m.value}{note}", f"wiring: {format_wiring(m.wiring)}",
            f"CHSH index: {m.index}", f"full wirings scanned: {len(full_wirings(first, second))}"], 0


def _bound_lines(rec):
    wit = ", ".join(f"{k}={v}" for k, v in rec.witness.items())
    return f"{rec.kind}: {rec.value}  [{wit}]"


def cmd_bound(args):
    b = _load(args.box)
    lines = []
    kinds = ["signal", "cost", "robustness"] if args.type == "all" else [args.type]
    if "signal" in kinds:
        cut, direction = _cut_direction(args)
        lines.append(_bound_lines(signal_weight_bound(b, cut, direction, args.box)))
    if "cost" in kinds:
        lines.append(_bound_lines(cost_lower_bound(b, args.cls, args.box)))
    if "robustness" in kinds:
        lines.append(_bound_lines(robustness_lower_bound(b, args.cls, args.box)))
    return lines, 0


def cmd_monotones(args):
    b = _load(args.box)
    spec = ClassSpec.parse(args.cls)
    lines = [f"class {spec}",
             f"cost (exact) = {cost3_exact(b, spec)}",
             f"robustness (exact) = {robustness3_exact(b, spec)}",
             _bound_lines(cost_lower_bound(b, spec, args.box)),
             _bound_lines(robustness_lower_bound(b, spec, args.box))]
    if args.wiring:
        cut, direction = _cut_direction(args)
        first, second = parse_direction(direction)
        wired = apply(parse_wiring(args.wiring, first, second), b)
        lines.append(f"wired cost = {cost2(wired)}")
        lines.append(f"wired robustness = {robustness2(wired)}")
    return lines, 0


def cmd_reproduce(args):
    records = reproduce_tables(include_class_tables=not args.quick)
    text = format_records(records, args.format)
    bad = [r for r in records if r.status != "PASS"]
    summary = (f"{len(records)} cells: {sum(r.status == 'PASS' for r in records)} PASS, "
               f"{sum(r.status == 'FAIL' for r in records)} FAIL, "
               f"{sum(r.status == 'FLAG' for r in records)} FLAG; "
               f"LP certificates verified {lp.STATS['verified']}/{lp.STATS['solves']}")
    return [text.rstrip("\n"), summary], (2 if bad else 0)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="boxwire", description="Exact wiring tools for tripartite boxes.",
                epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def box_cmd(name, fn, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--box", required=True, help="box file")
        s.set_defaults(fn=fn)
        return s

    box_cmd("check", cmd_check, "validate a box file and test non-signaling")
    s = box_cmd("classify", cmd_classify, "class membership by exact LP")
    s.add_argument("--class", dest="cls", required=True, help="T2, SVET, TOBL, NSBL, S or XYZ")
    s.add_argument("--cut", help="restrict per-cut tests to one cut")
    s.add_argument("--certificate", action="store_true", help="print decompositions")
    s = box_cmd("wire", cmd_wire, "apply a wiring and evaluate CHSH")
    s.add_argument("--wiring", required=True)
    s.add_argument("--direction", default="1to2")
    s.add_argument("--chsh", default="000", help="'all' or an index such as 000")
    s.add_argument("--show-box", action="store_true")

    s = sub.add_parser("wn", help="class-level WN of one canonical wiring")
    s.add_argument("--class", dest="cls", required=True)
    s.add_argument("--wiring", required=True)
    s.add_argument("--cut", default="3:12")
    s.add_argument("--direction")
    s.add_argument("--witness", action="store_true")
    s.set_defaults(fn=cmd_wn)

    s = sub.add_parser("mwn-class", help="class-level MWN over canonical wirings")
    s.add_argument("--class", dest="cls", required=True)
    s.add_argument("--cut", default="3:12")
    s.add_argument("--direction")
    s.set_defaults(fn=cmd_mwn_class)

    s = box_cmd("mwn-box", cmd_mwn_box, "MWN of one box over all full wirings")
    s.add_argument("--direction", default="1to2")

    s = box_cmd("bound", cmd_bound, "signalling-weight, cost and robustness bounds")
    s.add_argument("--type", choices=["signal", "cost", "robustness", "all"], default="all")
    s.add_argument("--class", dest="cls", default="TTT", help="class for cost/robustness bounds")
    s.add_argument("--cut", default="3:12")
    s.add_argument("--direction")

    s = box_cmd("monotones", cmd_monotones, "exact cost and robustness for a class")
    s.add_argument("--class", dest="cls", required=True)
    s.add_argument("--wiring", help="also report bipartite monotones of this wired box")
    s.add_argument("--cut", default="3:12")
    s.add_argument("--direction")

    s = sub.add_parser("reproduce", help="recompute every published table cell")
    s.add_argument("--format", choices=["text", "records"], default="text")
    s.add_argument("--quick", action="store_true", help="skip the class-level wiring tables")
    s.set_defaults(fn=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        lines, code = args.fn(args)
    except (BoxwireError, ValueError, OSError) as e:
        sys.stderr.write(f"boxwire: error: {e}\n\n{GRAMMAR}")
        return 1
    sys.stdout.write("\n".join(lines) + "\n")
    return code


def run(argv) -> int:
    return main(argv)


if __name__ == "__main__":
    raise SystemExit(main())
