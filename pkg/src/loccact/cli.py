"""Command-line interface.

Exit codes: 0 when every check passes, 1 when a claim check fails, 2 for
usage or input errors. Every flag can also be set through an environment
variable named ``LOCCACT_<FLAG>`` (e.g. ``LOCCACT_SEED=3``); explicit flags
win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import catalog
from . import io as fmt
from ._search import SearchBudget
from .classify import Status, check_activation, classify, replay_certificate
from .errors import LoccError, NotFoundError, UnsupportedDemoError
from .measurements import LocalMeasurement, is_oplm, projector_measurement
from .protocols import Leaf, ProtocolTree, simulate, verify_oplm_tree
from .states import FactorizationSpec, StateSet, has_local_redundancy, is_orthogonal_set
from .tensor_core import DEFAULT_TOL, OMEGA

ENV_PREFIX = "LOCCACT_"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = DEFAULT_TOL
    budget: SearchBudget = SearchBudget()
    seed: int = 0
    format: str = "text"
    output: str | None = None

    def __post_init__(self):
        if not 0 < self.tolerance < 1e-3:
            raise UsageError(f"tolerance must lie in (0, 1e-3), got {self.tolerance}")
        if self.format not in ("text", "structured"):
            raise UsageError(f"format must be text or structured, got {self.format!r}")


# ---------------------------------------------------------------------------
# ket rendering
# ---------------------------------------------------------------------------

_BOLD = "𝟎𝟏𝟐𝟑𝟒𝟓𝟔𝟕𝟖𝟗"
_COEFFS = [
    (1, ""),
    (OMEGA, "ω"),
    (OMEGA**2, "ω²"),
    (1j, "i"),
]


def _digit(i: int, d: int) -> str:
    if d == 4:
        return _BOLD[i]
    return str(i)


def _coeff(z: complex) -> tuple[str, str]:
    """Sign and magnitude-free symbol for ``z`` when recognisable, else a number."""
    for base, sym in _COEFFS:
        for sign, s in ((1, "+"), (-1, "-")):
            if abs(z - sign * base) < 1e-9:
                return s, sym
    if abs(z.imag) < 1e-12:
        return ("+" if z.real >= 0 else "-"), f"{abs(z.real):.6g}"
    return "+", f"({z.real:.6g}{z.imag:+.6g}i)"


def render_ket(amps: np.ndarray, dims) -> str:
    """Ket notation, with bold indices for four-dimensional factors."""
    terms = []
    sep = "," if max(dims) > 10 else ""
    for flat in np.flatnonzero(np.abs(amps) > 1e-12):
        idx = np.unravel_index(flat, dims)
        ket = "|" + sep.join(_digit(int(i), d) for i, d in zip(idx, dims)) + "⟩"
        sign, sym = _coeff(complex(amps[flat]))
        terms.append((sign, sym + ket))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def _render_set(s: StateSet, indent="  ") -> list[str]:
    return [f"{indent}{st.label} = {render_ket(st.amplitudes, s.sig.dims)}" for st in s.states]


def _render_tree(tree: ProtocolTree, indent="  ") -> list[str]:
    lines = []

    def walk(node, pad):
        if isinstance(node, Leaf):
            return
        m = node.measurement
        for lab, child in zip(m.outcome_labels, node.children):
            if isinstance(child, Leaf):
                end = f"declare {child.declare}" if child.declare else "stop"
                lines.append(f"{pad}{m.party}:{lab} -> {end}")
            else:
                lines.append(f"{pad}{m.party}:{lab}")
                walk(child, pad + "  ")

    walk(tree, indent)
    return lines


def _render_verdict(v, indent="  ") -> list[str]:
    lines = [f"{indent}status: {v.status.value}"]
    for r in v.rules:
        lines.append(f"{indent}  {r.rule}: {r.detail}")
    if v.protocol is not None:
        lines.append(f"{indent}protocol:")
        lines.extend(_render_tree(v.protocol, indent + "  "))
    if v.evidence:
        lines.append(f"{indent}evidence: {json.dumps(fmt.plain(v.evidence), sort_keys=True)}")
    return lines


# ---------------------------------------------------------------------------
# input resolution
# ---------------------------------------------------------------------------


class Target:
    def __init__(self, s: StateSet, factorization: FactorizationSpec | None, entry=None):
        self.state_set = s
        self.factorization = factorization
        self.entry = entry


def _load_target(ref: str) -> Target:
    if ref in catalog.ids():
        e = catalog.get(ref)
        return Target(e.state_set, e.factorization, e)
    if Path(ref).is_file():
        s, f = fmt.load_state_set(ref)
        return Target(s, f)
    raise NotFoundError(f"{ref!r} is neither a catalog id ({', '.join(catalog.ids())}) nor a readable file")


def _parse_measurement(ref: str | None, target: Target) -> LocalMeasurement:
    """A file, a catalog id (its activating measurement) or ``PARTY:0,1|2,3``."""
    if ref is None:
        if target.entry is None or target.entry.activating is None:
            raise UsageError("--measurement is required for sets without a catalog activating measurement")
        return target.entry.activating
    if Path(ref).is_file():
        return fmt.load_measurement(ref)
    if ref in catalog.ids():
        m = catalog.get(ref).activating
        if m is None:
            raise UnsupportedDemoError(f"catalog entry {ref} has no activating measurement")
        return m
    if ":" in ref:
        party, spec = ref.split(":", 1)
        try:
            sets = [[int(i) for i in part.split(",")] for part in spec.split("|")]
        except ValueError:
            raise UsageError(f"cannot parse measurement spec {ref!r}") from None
        return projector_measurement(party, sets, target.state_set.sig.party_dim(party))
    raise NotFoundError(f"measurement {ref!r} is not a file, catalog id or PARTY:i,j|k spec")


# ---------------------------------------------------------------------------
# commands; each returns (exit code, structured doc, text lines)
# ---------------------------------------------------------------------------


def cmd_catalog(args, cfg: RunConfig):
    if args.action == "list":
        doc = {"ids": catalog.ids()}
        lines = [f"{eid:16s} {catalog.get(eid).title}" for eid in catalog.ids()]
        return EXIT_OK, doc, lines
    if args.id is None:
        raise UsageError("catalog show needs an id")
    e = catalog.get(args.id)
    doc = {
        "id": e.id,
        "title": e.title,
        "state_set": fmt.state_set_to_dict(e.state_set, e.factorization),
        "protocols": {k: fmt.protocol_to_dict(t) for k, t in e.protocols.items()},
        "activating": fmt.measurement_to_dict(e.activating) if e.activating else None,
        "claims": [{"kind": c.kind, "description": c.description, "params": c.params} for c in e.claims],
        "notes": list(e.notes),
    }
    sig = e.state_set.sig
    lines = [f"{e.id}: {e.title}", f"dims {list(sig.dims)}, parties {list(sig.parties)}, {len(e.state_set)} states"]
    if e.factorization is not None:
        lines.append(f"factorization: {json.dumps(e.factorization.to_dict(), sort_keys=True, ensure_ascii=False)}")
    lines.extend(_render_set(e.state_set))
    lines.extend(f"note: {n}" for n in e.notes)
    for name, tree in e.protocols.items():
        lines.append(f"protocol {name}:")
        lines.extend(_render_tree(tree))
    lines.append("claims:")
    lines.extend(f"  {c.kind}: {c.description}" for c in e.claims)
    return EXIT_OK, doc, lines


def cmd_verify(args, cfg: RunConfig):
    if args.target == "all":
        results = catalog.verify_all(cfg.budget, cfg.seed)
        doc = {"claims": [r._asdict() for r in results], "passed": all(r.passed for r in results)}
        lines = [f"{'PASS' if r.passed else 'FAIL'} {r.entry} {r.kind}: {r.detail}" for r in results]
        return (EXIT_OK if doc["passed"] else EXIT_FAIL), doc, lines

    t = _load_target(args.target)
    s = t.state_set
    only = args.orthogonality or args.redundancy
    checks, lines = {}, []
    ok = True
    if args.orthogonality or not only:
        rep = is_orthogonal_set(s, cfg.tolerance)
        checks["orthogonality"] = fmt.orthogonality_to_dict(rep, s)
        ok &= rep.orthogonal
        lines.append(f"{'PASS' if rep.orthogonal else 'FAIL'} orthogonality: max normalized overlap {rep.max_overlap:.3e}")
        if rep.witness is not None:
            i, j, ov = rep.witness
            lines.append(f"  witness: <{s.labels[i]}|{s.labels[j]}> = {ov.real:.6g}{ov.imag:+.6g}i")
    if args.redundancy or not only:
        rep = has_local_redundancy(s, t.factorization, cfg.tolerance)
        expected = None
        if t.entry is not None:
            for c in t.entry.claims:
                if c.kind == "redundancy":
                    expected = c.params["expected"]
        passed = expected is None or rep.redundant == expected
        ok &= passed
        d = fmt.redundancy_to_dict(rep)
        d["expected"] = expected
        checks["redundancy"] = d
        tag = "expected" if expected is not None else "no expectation"
        lines.append(f"{'PASS' if passed else 'FAIL'} redundancy: redundant={str(rep.redundant).lower()} ({tag}; {rep.checked} discard sets)")
        for w in rep.witnesses:
            lines.append(f"  witness: discard {{{','.join(w.discard)}}} ({w.kind}), max overlap {w.max_overlap:.2e}")
    if t.entry is not None and not only:
        for r in catalog.verify_entry(t.entry, cfg.budget, cfg.seed):
            if r.kind in ("orthogonal", "redundancy"):
                continue
            checks.setdefault("claims", []).append(r._asdict())
            ok &= r.passed
            lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.kind}: {r.detail}")
    doc = {"target": args.target, "checks": checks, "passed": bool(ok), "tolerance": cfg.tolerance}
    return (EXIT_OK if ok else EXIT_FAIL), doc, lines


def cmd_classify(args, cfg: RunConfig):
    t = _load_target(args.target)
    v = classify(t.state_set, cfg.budget, cfg.seed, cfg.tolerance)
    doc = fmt.verdict_to_dict(v, cfg.tolerance, cfg.budget, cfg.seed)
    lines = [f"{args.target}: {len(t.state_set)} states, dims {list(t.state_set.sig.dims)}"]
    lines += _render_verdict(v)
    lines.append(f"tolerance {cfg.tolerance:g}, budget {cfg.budget.restarts}x{cfg.budget.iterations}, seed {cfg.seed}")
    return EXIT_OK, doc, lines


def _activation_lines(rep, m) -> list[str]:
    lines = [f"measurement {m.party}: {', '.join(m.outcome_labels)}"]
    for b in rep.branches:
        if b.verdict is None:
            lines.append(f"  outcome {b.outcome}: never occurs")
            continue
        lines.append(f"  outcome {b.outcome}: {b.size} states, {b.verdict.status.value} via {' > '.join(b.verdict.rule_names)}")
    lines.append(f"activating={str(rep.activating).lower()} cardinality_preserved={str(rep.cardinality_preserved).lower()}")
    return lines


def cmd_activate(args, cfg: RunConfig):
    t = _load_target(args.target)
    m = _parse_measurement(args.measurement, t)
    rep = check_activation(t.state_set, m, cfg.budget, cfg.seed, cfg.tolerance)
    doc = fmt.activation_to_dict(rep, cfg.tolerance, cfg.budget, cfg.seed)
    doc["measurement"] = fmt.measurement_to_dict(m)
    return (EXIT_OK if rep.activating else EXIT_FAIL), doc, _activation_lines(rep, m)


def cmd_demo_hide(args, cfg: RunConfig):
    e = catalog.get(args.id)
    if e.activating is None:
        raise UnsupportedDemoError(f"{e.id} has no activating measurement; nothing to hide")
    s, m, tol = e.state_set, e.activating, cfg.tolerance
    lines, doc, ok = [], {"id": e.id, "tolerance": tol, "budget": cfg.budget.to_dict(), "seed": cfg.seed}, True

    lines.append(f"[1] encoding: message k is sent as state k of {e.id}")
    doc["encoding"] = {str(k): st.label for k, st in enumerate(s.states)}
    for k, st in enumerate(s.states):
        lines.append(f"  {k} -> {st.label} = {render_ket(st.amplitudes, s.sig.dims)}")

    tree = e.protocols["distinguishing"]
    sim = simulate(tree, s, tol)
    oplm_tree = verify_oplm_tree(tree, s, tol)
    ok &= sim.perfect and oplm_tree
    doc["readout"] = {"protocol": fmt.protocol_to_dict(tree), "simulation": sim.to_dict(), "oplm_tree": oplm_tree}
    lines.append("[2] locally readable: the LOCC protocol below identifies every message")
    lines.extend(_render_tree(tree, "    "))
    lines.append(f"  perfect={str(sim.perfect).lower()}, worst error {sim.max_error:.2e} (tolerance {tol:g})")

    rep = is_oplm(s, m, tol)
    ok &= rep.oplm and rep.nontrivial
    lines.append(f"[3] hiding: {m.party} measures {', '.join(m.outcome_labels)} (OPLM={str(rep.oplm).lower()}, nontrivial={str(rep.nontrivial).lower()})")
    act = check_activation(s, m, cfg.budget, cfg.seed, tol)
    branches = []
    for k, b in enumerate(act.branches):
        if b.states is None:
            continue
        lines.append(f"  outcome {b.outcome}:")
        lines.extend(_render_set(b.states, "    "))
        branches.append((k, b))

    lines.append("[4] hidden: no LOCC protocol can read any branch")
    certs = []
    for k, b in branches:
        replay = replay_certificate(b.states, b.verdict, tol)
        good = b.verdict.status is Status.INDISTINGUISHABLE and replay and b.size == len(s)
        ok &= good
        certs.append({"outcome": b.outcome, "verdict": fmt.verdict_to_dict(b.verdict, tol, cfg.budget, cfg.seed), "replayed": replay})
        lines.append(f"  outcome {b.outcome}: {b.verdict.status.value}, replayed={str(replay).lower()}")
        lines.extend(_render_verdict(b.verdict, "    "))
    doc["certificates"] = certs
    ok &= act.activating

    lines.append("[5] recoverable globally: each branch set stays orthogonal, so a joint measurement reads it")
    glob = []
    for k, b in branches:
        G = b.states.normalized().gram()
        off = float(np.abs(G - np.diag(np.diag(G))).max())
        ok &= off < tol
        glob.append({"outcome": b.outcome, "max_offdiagonal": off})
        lines.append(f"  outcome {b.outcome}: normalized Gram matrix off-diagonal max {off:.2e}")
    doc["global"] = glob
    doc["passed"] = bool(ok)
    lines.append(("all checks pass" if ok else "some checks FAILED") + f" (tolerance {tol:g})")
    return (EXIT_OK if ok else EXIT_FAIL), doc, lines


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("run options")
    g.add_argument("--tolerance", type=float, default=argparse.SUPPRESS)
    g.add_argument("--budget", type=int, default=argparse.SUPPRESS, help="search restarts")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--format", choices=["text", "structured"], default=argparse.SUPPRESS)
    g.add_argument("--output", default=argparse.SUPPRESS, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loccact", description="Local distinguishability and nonlocality activation checks.")
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list or show built-in state sets")
    _common(p)
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("id", nargs="?")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("verify", help="check orthogonality, redundancy and catalog claims")
    _common(p)
    p.add_argument("target", help="catalog id, state-set file, or 'all'")
    p.add_argument("--redundancy", action="store_true")
    p.add_argument("--orthogonality", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", help="decide local distinguishability")
    _common(p)
    p.add_argument("target")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("activate", help="check whether a measurement activates nonlocality")
    _common(p)
    p.add_argument("target")
    p.add_argument("--measurement", help="file, catalog id, or PARTY:0,1|2,3")
    p.set_defaults(func=cmd_activate)

    p = sub.add_parser("demo", help="information hiding walkthrough")
    _common(p)
    demo = p.add_subparsers(dest="demo", required=True)
    h = demo.add_parser("hide")
    _common(h)
    h.add_argument("id")
    h.set_defaults(func=cmd_demo_hide)
    return parser


def _config(ns: argparse.Namespace, env) -> RunConfig:
    def pick(name, conv, default):
        if hasattr(ns, name):
            return getattr(ns, name)
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is None:
            return default
        try:
            return conv(raw)
        except ValueError:
            raise UsageError(f"bad value {raw!r} for {ENV_PREFIX}{name.upper()}") from None

    restarts = pick("budget", int, SearchBudget().restarts)
    if restarts < 1:
        raise UsageError("budget must be >= 1")
    return RunConfig(
        tolerance=pick("tolerance", float, DEFAULT_TOL),
        budget=SearchBudget(restarts=restarts),
        seed=pick("seed", int, 0),
        format=pick("format", str, "text"),
        output=pick("output", str, None),
    )


def main(argv=None, env=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    env = os.environ if env is None else env
    try:
        cfg = _config(ns, env)
        code, doc, lines = ns.func(ns, cfg)
    except (UsageError, LoccError, OSError, json.JSONDecodeError) as exc:
        msg = exc.args[0] if exc.args else exc
        print(f"loccact: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    text = fmt.dumps(doc) if cfg.format == "structured" else "\n".join(lines) + "\n"
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
