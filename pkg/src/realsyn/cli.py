"""``realsyn run FILE``: realizability check followed by program extraction."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass

from .assertions import FAIL
from .lexer import ParseError
from .oracle import OracleConfig, brute_force_hoare
from .parser import SketchFile, load_sketch
from .realizability import EngineConfig, UnjustifiedAnnotation, gen_vcs
from .realization import dump_outline, syn
from .sketch import render

__all__ = ["RunConfig", "emit_report", "main", "run"]

UNVALIDATED = "not synthesized (outline unvalidated)"
TIMING_FIELDS = ("vc_ms", "syn_ms")


@dataclass
class RunConfig:
    mode: str = "pessimistic"
    domain: str | None = None
    oracle_budget: int = 64
    unroll: int = 8
    depth: int = 3
    target: str = "0"
    emit_outline: bool = False
    out: str | None = None

    def __post_init__(self):
        if self.mode not in ("pessimistic", "optimistic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.domain not in (None, "finite", "smr"):
            raise ValueError(f"unknown domain {self.domain!r}")
        if min(self.oracle_budget, self.unroll, self.depth) < 0:
            raise ValueError("bounds must be non-negative")


def _targets(sf: SketchFile, selector: str) -> list:
    goals = [t for t in sf.targets if t is not FAIL]
    if selector == "all":
        return goals
    try:
        k = int(selector)
    except ValueError:
        raise ValueError(f"--target takes an index or 'all', not {selector!r}") from None
    if not 0 <= k < len(sf.targets):
        raise ValueError(f"--target {k} out of range: the file lists {len(sf.targets)} postcondition(s)")
    if sf.targets[k] is FAIL:
        raise ValueError(f"--target {k} is fail, which is not a synthesis target")
    return [sf.targets[k]]


def _insertions(result, show_command) -> list[dict]:
    out = []
    for node, name, k, prog in sorted(result.resolutions, key=lambda x: x[0]):
        text = render(prog, show_command)
        if text != "skip":
            out.append({"node": node, "nonterminal": name, "production": k, "program": text})
    return out


def run(sf: SketchFile, cfg: RunConfig) -> tuple[int, dict]:
    """Run the pipeline on a parsed file.  Returns ``(exit status, report)``."""
    dom = sf.domain
    if cfg.domain is not None and cfg.domain != dom.name.split("-")[0]:
        raise ValueError(f"--domain {cfg.domain} does not match the file's domain {dom.name}")
    goals = _targets(sf, cfg.target)
    show_command = str
    pessimistic = cfg.mode == "pessimistic"
    econf = EngineConfig(cfg.oracle_budget, cfg.unroll, cfg.depth, discharge=pessimistic)
    report: dict = {"mode": cfg.mode, "domain": dom.name}
    recursive = sf.grammar.recursive_names()
    if recursive:
        report["recursive_nonterminals"] = recursive

    t0 = time.perf_counter()
    try:
        vcs, outline = gen_vcs(dom, sf.grammar, sf.triple, econf)
    except UnjustifiedAnnotation as exc:
        report.update(verdict="annotation not justified", error=str(exc), node=exc.node,
                      vc_ms=(time.perf_counter() - t0) * 1e3, syn_ms=0.0)
        return 1, report
    vc_ms = (time.perf_counter() - t0) * 1e3
    report.update(
        vc_ms=vc_ms,
        vc_count={"raw": vcs.raw_count, "unique": vcs.unique_count},
        vc_checks=vcs.checks,
        oracle_j=dict(sorted(vcs.oracle_j.items())),
    )
    if cfg.emit_outline:
        report["outline"] = dump_outline(outline, dom.show, show_command)

    if pessimistic and not vcs.verdict:
        report.update(
            verdict="unrealizable",
            syn_ms=0.0,
            syn_checks=0,
            witness=[{"node": vc.origin, "lhs": sorted(map(dom.show, vc.lhs)), "unjustified": dom.show(w)}
                     for vc, w in vcs.failures()],
        )
        return 1, report

    t1 = time.perf_counter()
    entries = []
    for s in goals:
        res = syn(outline, vcs.store, s)
        entry = {"target": dom.show(s), "syn_checks": res.checks, "backtracks": res.backtracks}
        if res.ok:
            inserted = _insertions(res, show_command)
            entry.update(
                verdict="realized",
                program=render(res.program, show_command, elide_skip=True),
                precondition=dom.show(res.pre),
                insertions=inserted,
            )
            notes = [i["program"] for i in inserted if "@inv" in i["program"]]
            if notes:
                entry["annotations_to_discharge_separately"] = notes
        else:
            entry.update(verdict=UNVALIDATED if not pessimistic else "extraction aborted", reason=res.aborted)
        entries.append((entry, res, s))
    report["syn_ms"] = (time.perf_counter() - t1) * 1e3
    # bounded re-check of each extracted program by execution, outside the timings
    bounds = OracleConfig(cfg.unroll, cfg.depth)
    for entry, res, s in entries:
        if res.ok:
            entry["oracle_confirmed"] = brute_force_hoare(dom, res.pre, res.program, s, bounds)
    entries = [entry for entry, _, _ in entries]
    report["syn_checks"] = sum(e["syn_checks"] for e in entries)

    ok = bool(entries) and all(e["verdict"] == "realized" for e in entries)
    if cfg.target != "all":
        report.update({k: v for k, v in entries[0].items() if k != "syn_checks"})
    else:
        report["targets"] = entries
        report["verdict"] = "realized" if ok else (UNVALIDATED if not pessimistic else "extraction aborted")
    if not entries:
        report["verdict"] = "no synthesis target"
    return (0 if ok else 1), report


def emit_report(report: dict, as_json: bool = False) -> str:
    """Render the report as sorted JSON or as ``key: value`` text."""
    if as_json:
        return json.dumps(report, indent=2, sort_keys=True)
    lines = []
    for key in sorted(report):
        value = report[key]
        if key in TIMING_FIELDS:
            value = f"{value:.2f}"
        elif isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True)
        lines.append(f"{key}: {value}")
    return "\n".join(lines)


def _arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="realsyn", description="Synthesize a program from a sketch file.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="check realizability and extract a program")
    r.add_argument("file")
    r.add_argument("--mode", choices=("pessimistic", "optimistic"), default="pessimistic")
    r.add_argument("--domain", choices=("finite", "smr"))
    r.add_argument("--oracle-budget", type=int, default=64)
    r.add_argument("--unroll", type=int, default=8)
    r.add_argument("--depth", type=int, default=3, help="derivation depth of default nonterminal transformers")
    r.add_argument("--target", default="0", help="index of the postcondition predicate, or 'all'")
    r.add_argument("--emit-outline", action="store_true")
    r.add_argument("--json", action="store_true", help="print JSON instead of text")
    r.add_argument("--out", help="also write the JSON report here")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _arg_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.mode, args.domain, args.oracle_budget, args.unroll, args.depth,
                        args.target, args.emit_outline, args.out)
        sf = load_sketch(args.file)
        status, report = run(sf, cfg)
    except (ParseError, ValueError, OSError) as exc:
        print(f"realsyn: error: {exc}", file=sys.stderr)
        return 2
    print(emit_report(report, args.json))
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(emit_report(report, True) + "\n")
        except OSError as exc:
            print(f"realsyn: error: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
