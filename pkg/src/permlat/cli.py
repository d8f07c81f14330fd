"""Command-line front end: ``permlat <command> FILE [options]``.

Input files are line-oriented UTF-8 text::

    # comment
    p = 2
    mode = integers              # or: mode = truncated e=3
    [group]
    generators = (1 2 3 4); (2 4)   # cycles on points 1..n, or: table = [[...], ...]
    [lattice X]
    rank = 2
    a = [[0, 1], [1, 0]]         # one matrix per generator name a, b, c, ...
    b = [[1, 0], [0, 1]]
    [subgroup N]
    generators = a^2             # words in the generator names; or: elements = 1, a^2

Matrices act on column vectors and are written row by row; a value may
span several lines while brackets are open.  Subgroup arguments on the
command line are names of ``[subgroup]`` sections or inline ``1``, ``G``,
``<a^2,b>``.

Reports are written to standard output in the same format (so they can be
parsed again); the human summary and timings go to standard error.

Exit codes: 0 success (``recognize``: permutation; ``weiss``: verified),
1 negative verdict (not permutation / hypothesis failed), 2 input error,
3 internal failure (``weiss``: theorem violated).
"""

from __future__ import annotations

import argparse
import ast
import random
import sys
import time
from dataclasses import dataclass, field

from .brauer import Kind, brauer_quotient, head_dim
from .cover import permutation_cover
from .exactla import ExactMatrix, RingError, RingSpec
from .latmod import Lattice, LatticeError, LatticeMap, h1, mackey_decompose, map_kernel, restrict
from .pgroup import GroupError, PGroup, Subgroup, _generator_names, parse_cycles
from .recognize import (
    WeissStatus,
    cliff_weiss_recognize,
    recognize_permutation,
    weiss_check,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Reading documents


@dataclass
class Section:
    kind: str
    name: str | None
    line: int
    entries: dict[str, tuple[str, int]] = field(default_factory=dict)


@dataclass
class Document:
    ring: RingSpec
    group: PGroup
    lattices: dict[str, Lattice]
    subgroups: dict[str, Subgroup]
    header: dict[str, str]
    sections: list[Section]

    def section(self, kind: str, name: str | None = None) -> Section | None:
        for s in self.sections:
            if s.kind == kind and s.name == name:
                return s
        return None


def _logical_lines(text: str):
    """Yield ``(line number, text)`` with comments stripped and bracketed values joined."""
    buf, start, depth = [], 0, 0
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not buf:
            if not line.strip():
                continue
            start = no
        buf.append(line.strip())
        depth += line.count("[") - line.count("]")
        if line.strip().startswith("[") and line.strip().endswith("]") and len(buf) == 1 and "=" not in line:
            depth = 0  # section header
        if depth <= 0:
            yield start, " ".join(buf)
            buf, depth = [], 0
    if buf:
        raise ParseError(start, "unbalanced brackets")


def read_sections(text: str) -> tuple[dict[str, tuple[str, int]], list[Section]]:
    header: dict[str, tuple[str, int]] = {}
    sections: list[Section] = []
    cur: Section | None = None
    for no, line in _logical_lines(text):
        if line.startswith("[") and line.endswith("]") and "=" not in line:
            parts = line[1:-1].split(None, 1)
            if not parts:
                raise ParseError(no, "empty section header")
            cur = Section(parts[0], parts[1].strip() if len(parts) > 1 else None, no)
            sections.append(cur)
            continue
        if "=" not in line:
            raise ParseError(no, f"expected 'key = value', got {line!r}")
        key, val = (t.strip() for t in line.split("=", 1))
        if not key:
            raise ParseError(no, "missing key")
        target = header if cur is None else cur.entries
        if key in target:
            raise ParseError(no, f"duplicate key {key!r}")
        target[key] = (val, no)
    return header, sections


def parse_matrix(text: str, line: int) -> list[list[int]]:
    try:
        val = ast.literal_eval(text)
    except (ValueError, SyntaxError):
        raise ParseError(line, f"not an integer matrix: {text!r}") from None
    if not isinstance(val, list) or not all(isinstance(r, list) for r in val):
        raise ParseError(line, "matrix must be a list of rows")
    if any(not isinstance(x, int) or isinstance(x, bool) for r in val for x in r):
        raise ParseError(line, "matrix entries must be integers")
    if val and len({len(r) for r in val}) != 1:
        raise ParseError(line, "matrix rows have different lengths")
    return val


def parse_ring(header) -> RingSpec:
    if "p" not in header:
        raise ParseError(1, "missing 'p = ...'")
    pv, pl = header["p"]
    try:
        p = int(pv)
    except ValueError:
        raise ParseError(pl, f"p must be an integer, got {pv!r}") from None
    mode, ml = header.get("mode", ("integers", pl))
    words = mode.split()
    try:
        if words == ["integers"]:
            return RingSpec.integers(p)
        if words and words[0] == "truncated":
            opts = dict(w.split("=", 1) for w in words[1:])
            if set(opts) != {"e"}:
                raise ParseError(ml, "truncated mode needs exactly 'e=<exponent>'")
            return RingSpec.truncated(p, int(opts["e"]))
    except (RingError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(ml, str(exc)) from None
    raise ParseError(ml, f"unknown mode {mode!r}")


def parse_group(sec: Section | None, p: int) -> PGroup:
    if sec is None:
        raise ParseError(1, "missing [group] section")
    if "generators" in sec.entries and "table" in sec.entries:
        raise ParseError(sec.line, "give either generators or table, not both")
    if "generators" in sec.entries:
        text, line = sec.entries["generators"]
        cycles = [c.strip() for c in text.split(";") if c.strip()]
        if not cycles:
            raise ParseError(line, "empty generator list")
        try:
            return PGroup.from_generators([parse_cycles(c) for c in cycles], p)
        except GroupError as exc:
            raise ParseError(line, str(exc)) from None
    if "table" in sec.entries:
        text, line = sec.entries["table"]
        try:
            return PGroup(parse_matrix(text, line), p)
        except GroupError as exc:
            raise ParseError(line, str(exc)) from None
    raise ParseError(sec.line, "empty group block: give 'generators = ...' or 'table = ...'")


def parse_subgroup_text(g: PGroup, text: str, named: dict[str, Subgroup] | None = None) -> Subgroup:
    """``1``, ``G``, ``<w1,w2>`` or the name of a declared subgroup."""
    t = text.strip()
    if named and t in named:
        return named[t]
    if t == "1":
        return g.trivial_subgroup
    if t == "G":
        return g.whole
    if t.startswith("<") and t.endswith(">"):
        words = [w for w in t[1:-1].split(",") if w.strip()]
        return g.subgroup(g.word(w) for w in words)
    raise InputError(f"unknown subgroup {text!r}")


def parse_document(text: str, validate: bool = True) -> Document:
    header, sections = read_sections(text)
    ring = parse_ring(header)
    groups = [s for s in sections if s.kind == "group"]
    if len(groups) > 1:
        raise ParseError(groups[1].line, "more than one [group] section")
    g = parse_group(groups[0] if groups else None, ring.p)
    names = _generator_names(len(g.generators))
    lattices: dict[str, Lattice] = {}
    subgroups: dict[str, Subgroup] = {}
    for sec in sections:
        if sec.kind == "subgroup":
            if not sec.name:
                raise ParseError(sec.line, "subgroup section needs a name")
            try:
                if "generators" in sec.entries:
                    text_, line = sec.entries["generators"]
                    subgroups[sec.name] = g.subgroup(g.word(w) for w in text_.split(",") if w.strip())
                elif "elements" in sec.entries:
                    text_, line = sec.entries["elements"]
                    els = [g.word(w) for w in text_.split(",") if w.strip()]
                    if not g.is_subgroup(els):
                        raise ParseError(line, "elements do not form a subgroup")
                    subgroups[sec.name] = Subgroup.of(els)
                else:
                    raise ParseError(sec.line, "subgroup needs 'generators' or 'elements'")
            except GroupError as exc:
                raise ParseError(line, str(exc)) from None
    for sec in sections:
        if sec.kind != "lattice":
            continue
        if not sec.name:
            raise ParseError(sec.line, "lattice section needs a name")
        if sec.name in lattices:
            raise ParseError(sec.line, f"duplicate lattice {sec.name!r}")
        if "rank" not in sec.entries:
            raise ParseError(sec.line, f"lattice {sec.name}: missing rank")
        rank_text, rank_line = sec.entries["rank"]
        try:
            rank = int(rank_text)
        except ValueError:
            raise ParseError(rank_line, f"lattice {sec.name}: rank must be an integer, got {rank_text!r}") from None
        if rank < 0:
            raise ParseError(rank_line, f"lattice {sec.name}: negative rank")
        mats = []
        for nm in names:
            if nm not in sec.entries:
                raise ParseError(sec.line, f"lattice {sec.name}: missing matrix for generator {nm}")
            text_, line = sec.entries[nm]
            m = parse_matrix(text_, line) if rank else []
            if len(m) != rank or any(len(r) != rank for r in m):
                raise ParseError(line, f"lattice {sec.name}: matrix for {nm} is not {rank}x{rank}")
            mats.append(ExactMatrix(ring, m, rank))
        extra = set(sec.entries) - set(names) - {"rank"}
        if extra:
            raise ParseError(sec.entries[sorted(extra)[0]][1], f"unknown key {sorted(extra)[0]!r}")
        try:
            lat = Lattice.from_generators(g, ring, mats, rank=rank, check=False)
            if validate:
                lat.validate()
        except LatticeError as exc:
            raise ParseError(sec.line, f"lattice {sec.name}: {exc}") from None
        lattices[sec.name] = lat
    return Document(ring, g, lattices, subgroups, {k: v for k, (v, _) in header.items()}, sections)


# ---------------------------------------------------------------------------
# Writing reports


def fmt_matrix(rows) -> str:
    return "[" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in rows) + "]"


def ring_line(ring: RingSpec) -> str:
    return "integers" if ring.is_integers else f"truncated e={ring.e}"


class Report:
    def __init__(self, command: str, doc: Document):
        self.lines = [f"# permlat report: {command}", f"p = {doc.ring.p}", f"mode = {ring_line(doc.ring)}",
                      f"command = {command}"]
        self.doc = doc
        self.group_block()

    def group_block(self):
        g = self.doc.group
        self.lines.append("[group]")
        perms = getattr(g, "permutations", None)
        if perms is not None:
            self.lines.append("generators = " + "; ".join(_cycles(perms[s]) for s in g.generators))
        else:
            self.lines.append("table = " + fmt_matrix(g.table))

    def section(self, kind: str, name: str | None = None, **entries):
        self.lines.append(f"[{kind} {name}]" if name else f"[{kind}]")
        for k, v in entries.items():
            self.lines.append(f"{k} = {v}")

    def lattice(self, name: str, u: Lattice):
        names = _generator_names(len(u.group.generators))
        self.section("lattice", name, rank=u.rank,
                     **{nm: fmt_matrix(u.action[s].rows) for nm, s in zip(names, u.group.generators)})

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _cycles(perm) -> str:
    seen, out = set(), []
    for i in range(len(perm)):
        if i in seen or perm[i] == i:
            continue
        c, j = [], i
        while j not in seen:
            seen.add(j)
            c.append(j + 1)
            j = perm[j]
        out.append("(" + " ".join(map(str, c)) + ")")
    return "".join(out) or "()"


def structure_text(g: PGroup, structure) -> str:
    return ", ".join(f"{g.subgroup_label(s)}: {d}" for s, d in structure.items) or "0"


def parse_structure(g: PGroup, text: str) -> dict[Subgroup, int]:
    text = text.strip()
    if text == "0":
        return {}
    out = {}
    depth, cur, parts = 0, "", []
    for ch in text:
        depth += ch == "<"
        depth -= ch == ">"
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    for part in parts:
        lab, d = part.rsplit(":", 1)
        out[g.class_representative(parse_subgroup_text(g, lab))] = int(d)
    return out


# ---------------------------------------------------------------------------
# Commands


def _pick_lattice(doc: Document, name: str | None) -> tuple[str, Lattice]:
    if name is None:
        if len(doc.lattices) != 1:
            raise InputError(f"choose a lattice with --lattice (have: {', '.join(doc.lattices) or 'none'})")
        name = next(iter(doc.lattices))
    if name not in doc.lattices:
        raise InputError(f"no lattice named {name!r}")
    return name, doc.lattices[name]


def _pick_subgroup(doc: Document, text: str | None, what: str) -> Subgroup:
    if text is None:
        raise InputError(f"missing {what}")
    try:
        return parse_subgroup_text(doc.group, text, doc.subgroups)
    except GroupError as exc:
        raise InputError(str(exc)) from None


def cmd_info(doc: Document, args, rep: Report, err) -> int:
    g = doc.group
    status = EXIT_OK
    rep.section("info", order=g.order, generators=len(g.generators),
                subgroups=len(g.all_subgroups), classes=len(g.class_representatives))
    for name, u in doc.lattices.items():
        try:
            u.validate()
            valid = "ok"
        except LatticeError as exc:
            valid = str(exc)
            status = EXIT_INPUT
        rep.section("lattice_info", name, rank=u.rank, action=valid)
        err(f"lattice {name}: rank {u.rank}, action {valid}")
    err(f"group of order {g.order}, {len(g.all_subgroups)} subgroups in {len(g.class_representatives)} classes")
    return status


def cmd_subgroups(doc: Document, args, rep: Report, err) -> int:
    g = doc.group
    for i, (rep_s, members) in enumerate(g.subgroup_classes):
        for s in members:
            rep.section("subgroup", g.subgroup_label(s),
                        elements=", ".join(g.labels[x] for x in s.elements),
                        order=s.order, class_id=i, representative=g.subgroup_label(rep_s),
                        normal="yes" if g.is_normal(s) else "no",
                        normalizer=g.subgroup_label(g.normalizer(s)))
    err(f"{len(g.all_subgroups)} subgroups, {len(g.subgroup_classes)} classes")
    return EXIT_OK


def cmd_brauer(doc: Document, args, rep: Report, err) -> int:
    name, u = _pick_lattice(doc, args.lattice)
    P = _pick_subgroup(doc, args.subgroup, "--subgroup")
    g = doc.group
    for kind in (Kind.UPPER, Kind.DOUBLE):
        b = brauer_quotient(u, P, kind)
        w = b.quotient
        wn = _generator_names(len(w.generators))
        acts = {f"action_{nm}": fmt_matrix(b.action[s]) for nm, s in zip(wn, w.generators)}
        rep.section("brauer", kind.value, lattice=name, subgroup=g.subgroup_label(P), quotient_order=w.order,
                    dim=b.dim, head_dim=head_dim(b),
                    basis=fmt_matrix(b.basis_vectors()), **acts)
        err(f"{kind.value} quotient at {g.subgroup_label(P)}: dim {b.dim}, head {head_dim(b)}")
    return EXIT_OK


def cmd_cover(doc: Document, args, rep: Report, err) -> int:
    name, u = _pick_lattice(doc, args.lattice)
    rng = random.Random(args.seed) if args.randomize else None
    res = permutation_cover(u, rng=rng)
    g = doc.group
    rep.section("result", lattice=name, structure=structure_text(g, res.structure),
                cover_rank=res.cover_module.rank, kernel_rank=res.kernel.rank,
                kernel=fmt_matrix(res.kernel.basis.rows))
    rep.lattice(name, u)
    rep.lattice("cover", res.cover_module)
    rep.section("map", "theta", source="cover", target=name, matrix=fmt_matrix(res.theta.matrix.rows))
    for P, lifts in res.lifts.items():
        rep.section("lift", g.subgroup_label(P), vectors=fmt_matrix(lifts.rows))
    err(f"cover of {name}: {res.structure.describe(g)}; kernel rank {res.kernel.rank}")
    return EXIT_OK


def cmd_recognize(doc: Document, args, rep: Report, err) -> int:
    name, u = _pick_lattice(doc, args.lattice)
    g = doc.group
    if args.method == "cliffweiss":
        r = cliff_weiss_recognize(u)
        extra = {"coflasque": "yes" if r.details["coflasque"] else "no",
                 "mod_p_permutation": "yes" if r.details["mod_p_permutation"] else "no"}
        if r.details["coflasque_witness"] is not None:
            extra["coflasque_witness"] = g.subgroup_label(r.details["coflasque_witness"])
    else:
        r = recognize_permutation(u)
        extra = {}
    rep.section("result", lattice=name, method=args.method, verdict=r.verdict,
                structure=structure_text(g, r.structure), kernel_rank=r.kernel.rank, **extra)
    if r.is_permutation:
        rep.section("map", "isomorphism", source="cover", target=name, matrix=fmt_matrix(r.isomorphism.matrix.rows))
    else:
        rep.section("certificate", "kernel", rows=fmt_matrix(r.kernel.basis.rows))
    err(f"{name}: {r.verdict} ({r.structure.describe(g)})")
    return EXIT_OK if r.is_permutation else EXIT_NEGATIVE


def cmd_weiss(doc: Document, args, rep: Report, err) -> int:
    name, u = _pick_lattice(doc, args.lattice)
    n = _pick_subgroup(doc, args.normal, "--normal")
    g = doc.group
    r = weiss_check(u, n)
    rep.section("result", lattice=name, normal=g.subgroup_label(n), status=r.status.value, summary=r.summary(),
                failed=", ".join(map(str, r.failed)) or "none",
                hypothesis_1="free of rank %d" % r.hypothesis_1.rank if r.hypothesis_1 else "not free",
                hypothesis_2=r.hypothesis_2.verdict,
                fixed_structure=structure_text(g, r.hypothesis_2.structure),
                conclusion=r.conclusion.verdict, structure=structure_text(g, r.conclusion.structure))
    err(f"{name}, N = {g.subgroup_label(n)}: {r.summary()}")
    return {WeissStatus.VERIFIED: EXIT_OK, WeissStatus.HYPOTHESIS_FAILED: EXIT_NEGATIVE,
            WeissStatus.VIOLATED: EXIT_INTERNAL}[r.status]


def cmd_h1(doc: Document, args, rep: Report, err) -> int:
    name, u = _pick_lattice(doc, args.lattice)
    h = _pick_subgroup(doc, args.subgroup or "G", "--subgroup")
    pres = h1(h, u)
    inv = ", ".join(map(str, pres.torsion)) or "0"
    rep.section("result", lattice=name, subgroup=doc.group.subgroup_label(h), invariants=inv)
    err(f"H^1({doc.group.subgroup_label(h)}, {name}) = {' + '.join(f'Z/{d}' for d in pres.torsion) or '0'}")
    return EXIT_OK


def cmd_mackey(doc: Document, args, rep: Report, err) -> int:
    name, u = _pick_lattice(doc, args.lattice)
    g = doc.group
    h = _pick_subgroup(doc, args.subgroup, "--subgroup")
    l_sub = _pick_subgroup(doc, args.over, "--over")
    v = restrict(u, h)
    md = mackey_decompose(v, g, l_sub)
    for t, s, comp in md.components:
        rep.section("component", g.labels[t], intersection=g.subgroup_label(s), rank=comp.rank)
    rep.section("result", lattice=name, subgroup=g.subgroup_label(h), over=g.subgroup_label(l_sub),
                components=len(md.components), rank=md.target.rank, verified="yes",
                isomorphism=fmt_matrix(md.isomorphism.matrix.rows))
    err(f"Mackey: {len(md.components)} components, isomorphism verified")
    return EXIT_OK


COMMANDS = {
    "info": cmd_info,
    "subgroups": cmd_subgroups,
    "brauer": cmd_brauer,
    "cover": cmd_cover,
    "recognize": cmd_recognize,
    "weiss": cmd_weiss,
    "h1": cmd_h1,
    "mackey": cmd_mackey,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="permlat", description="Permutation lattices over finite p-groups.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("file")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized choices (default 0)")
        if name not in ("info", "subgroups"):
            sp.add_argument("--lattice", help="lattice name (optional if the file has one)")
        if name in ("brauer", "h1", "mackey"):
            sp.add_argument("--subgroup", help="subgroup name or <words>")
        if name == "mackey":
            sp.add_argument("--over", help="subgroup L to restrict to")
        if name == "weiss":
            sp.add_argument("--normal", required=True, help="normal subgroup N")
        if name == "recognize":
            sp.add_argument("--method", choices=["cover", "cliffweiss"], default="cover")
        if name == "cover":
            sp.add_argument("--randomize", action="store_true", help="random lift choices from --seed")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    def err(msg):
        print(msg, file=sys.stderr)

    t0 = time.perf_counter()
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
        doc = parse_document(text, validate=args.command != "info")
        rep = Report(args.command, doc)
        code = COMMANDS[args.command](doc, args, rep, err)
    except (ParseError, InputError, OSError) as exc:
        err(f"error: {exc}")
        return EXIT_INPUT
    except (GroupError, LatticeError, RingError) as exc:
        err(f"error: {exc}")
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - any other failure is a bug; report it as such
        err(f"internal failure: {type(exc).__name__}: {exc}")
        return EXIT_INTERNAL
    sys.stdout.write(rep.text())
    err(f"time: {time.perf_counter() - t0:.3f}s")
    return code


def verify_cover_report(text: str) -> bool:
    """Re-parse a ``cover`` report and re-check theta's equivariance and kernel."""
    doc = parse_document(text)
    res = doc.section("result")
    theta = doc.section("map", "theta")
    x = doc.lattices[theta.entries["target"][0]]
    c = doc.lattices["cover"]
    m = ExactMatrix(doc.ring, parse_matrix(*theta.entries["matrix"]), x.rank)
    f = LatticeMap(c, x, m)  # raises unless equivariant
    return map_kernel(f).rank == int(res.entries["kernel_rank"][0])


if __name__ == "__main__":
    sys.exit(main())
