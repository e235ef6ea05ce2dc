"""Command-line front end.

    mupuppet compile site.pp --node web.example.com [--facts facts.json] ...
    mupuppet test corpus/ [--jobs N]
    mupuppet audit site.pp --node web.example.com

Exit codes: 0 success, 1 compilation error (or failing cases), 2 parse or
usage error, 3 I/O error or invalid facts.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from . import syntax as S
from .conformance import audited_compile
from .errors import CompileError, ErrorKind
from .evaluator import Limits, compile
from .parser import ParseError, parse_manifest
from .printer import stmt
from .values import ResourceValue, from_python

EXIT_OK, EXIT_COMPILE, EXIT_PARSE, EXIT_IO = 0, 1, 2, 3

_FACT_NAME = re.compile(r"[a-z_][a-zA-Z0-9_]*")


class InvalidFacts(ValueError):
    pass


# -- catalog documents ---------------------------------------------------------


def value_to_json(v):
    if isinstance(v, (S.IntLit, S.StrLit, S.BoolLit)):
        return v.value
    if isinstance(v, S.ArrayExpr):
        return [value_to_json(x) for x in v.items]
    if isinstance(v, S.HashExpr):
        keys = [k for k, _ in v.entries]
        plain = (all(isinstance(k, str) and not k.startswith("$") for k in keys)
                 and len(set(keys)) == len(keys))
        if plain:
            return {k: value_to_json(x) for k, x in v.entries}
        return {"$hash": [[k, value_to_json(x)] for k, x in v.entries]}
    if isinstance(v, S.ResourceRef):
        return {"$ref": {"type": v.type, "title": value_to_json(v.title)}}
    raise TypeError(f"not a value: {v!r}")


def value_from_json(obj):
    if isinstance(obj, dict):
        if list(obj) == ["$ref"]:
            ref = obj["$ref"]
            return S.ResourceRef(ref["type"], value_from_json(ref["title"]))
        if list(obj) == ["$hash"]:
            return S.HashExpr(tuple((k, value_from_json(x)) for k, x in obj["$hash"]))
        return S.HashExpr(tuple((k, value_from_json(x)) for k, x in obj.items()))
    if isinstance(obj, list):
        return S.ArrayExpr(tuple(value_from_json(x) for x in obj))
    return from_python(obj)


def catalog_to_json(catalog, node: str) -> dict:
    return {
        "node": node,
        "resources": [
            {"type": r.type, "title": r.title,
             "parameters": {k: value_to_json(v) for k, v in r.attrs}}
            for r in catalog
        ],
    }


def catalog_from_json(doc: dict):
    return tuple(
        ResourceValue(r["type"], r["title"],
                      tuple((k, value_from_json(v)) for k, v in r["parameters"].items()))
        for r in doc["resources"]
    )


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def render_catalog(catalog, node: str, fmt: str = "json") -> str:
    if fmt == "json":
        return dumps(catalog_to_json(catalog, node))
    blocks = [stmt(S.ResourceDecl(r.type, S.StrLit(r.title), r.attrs)) for r in catalog]
    return f"# catalog for {node}\n" + "".join(b + "\n" for b in blocks)


def load_facts(text: str):
    """Facts JSON (an object of name -> value) as (name, value) pairs."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidFacts(f"facts are not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise InvalidFacts("facts must be a JSON object")
    facts = []
    for name, value in doc.items():
        if not _FACT_NAME.fullmatch(name):
            raise InvalidFacts(f"invalid fact name {name!r}")
        try:
            facts.append((name, from_python(value)))
        except ValueError as e:
            raise InvalidFacts(f"fact {name!r}: {e}") from None
    return facts


# -- compile -------------------------------------------------------------------


def _types(arg: Optional[str]):
    if arg is None:
        return S.BUILTIN_TYPES
    return frozenset(t.strip() for t in arg.split(",") if t.strip())


def _write_trace(path: Path, trace) -> None:
    with path.open("w", encoding="utf-8") as f:
        for rec in trace.records if trace else ():
            f.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")


def cmd_compile(args) -> int:
    try:
        source = Path(args.manifest).read_text(encoding="utf-8")
        facts = load_facts(Path(args.facts).read_text(encoding="utf-8")) if args.facts else []
    except (OSError, UnicodeDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except InvalidFacts as e:
        print(f"{args.facts}: {e}", file=sys.stderr)
        return EXIT_IO
    builtin = _types(args.builtin_types)
    try:
        manifest = parse_manifest(source, builtin)
    except ParseError as e:
        print(f"{args.manifest}:{e}", file=sys.stderr)
        return EXIT_PARSE
    limits = Limits(max_steps=args.max_steps, paper_divergence=args.paper_divergence)
    trace_path = Path(args.trace) if args.trace else None
    try:
        try:
            result = compile(manifest, args.node, facts, limits, builtin, trace=trace_path is not None)
        except CompileError as e:
            if trace_path:
                _write_trace(trace_path, e.trace)
            sep = "" if e.pos else " "
            print(f"{args.manifest}:{sep}{e}", file=sys.stderr)
            return EXIT_COMPILE
        if trace_path:
            _write_trace(trace_path, result.trace)
        out = render_catalog(result.catalog, args.node, args.format)
        if args.out:
            Path(args.out).write_text(out, encoding="utf-8")
        else:
            sys.stdout.write(out)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# -- audit ---------------------------------------------------------------------


def cmd_audit(args) -> int:
    try:
        source = Path(args.manifest).read_text(encoding="utf-8")
        facts = load_facts(Path(args.facts).read_text(encoding="utf-8")) if args.facts else []
        manifest = parse_manifest(source, _types(args.builtin_types))
    except (OSError, UnicodeDecodeError, InvalidFacts) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ParseError as e:
        print(f"{args.manifest}:{e}", file=sys.stderr)
        return EXIT_PARSE
    limits = Limits(max_steps=args.max_steps, paper_divergence=args.paper_divergence)
    try:
        report = audited_compile(manifest, args.node, facts, limits, _types(args.builtin_types))
    except RecursionError:
        # the auditor recurses over the term; divergent runs outgrow it
        print("error: term too deep to audit; lower --max-steps", file=sys.stderr)
        return EXIT_COMPILE
    outcome = "ok" if report.error is None else report.error.kind.value
    print(f"{report.steps} steps, outcome {outcome}")
    problems = [*report.determinism, *(f"step {v.step}: {v.component}: {v.detail}"
                                       for v in report.monotonicity),
                *report.purity, *report.balance]
    for p in problems:
        print(f"  {p}")
    print("determinism, monotonicity, purity and balance hold" if report.ok
          else f"{len(problems)} violations")
    return EXIT_OK if report.ok else EXIT_COMPILE


# -- corpus runner -------------------------------------------------------------


@dataclass(frozen=True)
class CaseResult:
    name: str
    status: str  # PASS FAIL ERROR
    detail: str = ""


def _canonical(doc: dict) -> Counter:
    """Resources as a multiset; attribute order within a resource counts."""
    return Counter(
        json.dumps([r["type"], r["title"], list(r["parameters"].items())], sort_keys=True)
        for r in doc["resources"]
    )


def run_case(case: Path) -> CaseResult:
    name = case.name
    expect_json, expect_err = case / "expect.json", case / "expect-error.txt"
    try:
        if expect_json.exists() == expect_err.exists():
            return CaseResult(name, "ERROR", "need exactly one of expect.json, expect-error.txt")
        source = (case / "main.pp").read_text(encoding="utf-8")
        node = (case / "node.txt").read_text(encoding="utf-8").strip()
        facts_file = case / "facts.json"
        facts = load_facts(facts_file.read_text(encoding="utf-8")) if facts_file.exists() else []
        if expect_err.exists():
            wanted = expect_err.read_text(encoding="utf-8").strip()
            if wanted.replace("-", "").replace("_", "").lower() != "parseerror":
                wanted = ErrorKind.parse(wanted).value
            else:
                wanted = "ParseError"
            expected = None
        else:
            expected = json.loads(expect_json.read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError) as e:
        return CaseResult(name, "ERROR", str(e))

    try:
        result = compile(parse_manifest(source), node, facts)
    except (ParseError, CompileError) as e:
        got = "ParseError" if isinstance(e, ParseError) else e.kind.value
        if expected is None and got == wanted:
            return CaseResult(name, "PASS")
        want = wanted if expected is None else "a catalog"
        return CaseResult(name, "FAIL", f"expected {want}, got {got}: {e}")
    if expected is None:
        return CaseResult(name, "FAIL", f"expected {wanted}, but compilation succeeded")
    actual = catalog_to_json(result.catalog, node)
    try:
        same = _canonical(actual) == _canonical(expected)
    except (KeyError, TypeError, AttributeError) as e:
        return CaseResult(name, "ERROR", f"malformed expect.json: {e}")
    if not same:
        return CaseResult(name, "FAIL", "catalog differs:\n" + dumps(actual))
    return CaseResult(name, "PASS")


def find_cases(root: Path) -> List[Path]:
    return sorted(p.parent for p in root.rglob("main.pp"))


def run_corpus(root: Path, jobs: int = 1) -> List[CaseResult]:
    cases = find_cases(root)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(run_case, cases))
    else:
        results = [run_case(c) for c in cases]
    return sorted(results, key=lambda r: r.name)


def cmd_test(args) -> int:
    root = Path(args.corpus)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return EXIT_IO
    results = run_corpus(root, args.jobs)
    for r in results:
        line = f"{r.status} {r.name}"
        if r.detail and (r.status != "PASS"):
            line += ": " + r.detail.rstrip()
        print(line)
    counts = Counter(r.status for r in results)
    print(f"{counts['PASS']} passed, {counts['FAIL']} failed, {counts['ERROR']} harness errors")
    return EXIT_OK if results and counts["PASS"] == len(results) else EXIT_COMPILE


# -- entry point ---------------------------------------------------------------


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mupuppet", description="Compile a subset of Puppet manifests.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("manifest", help="manifest file (.pp)")
        p.add_argument("--node", required=True, help="name of the requesting node")
        p.add_argument("--facts", help="JSON object of top-scope facts")
        p.add_argument("--max-steps", type=_positive, default=Limits().max_steps)
        p.add_argument("--paper-divergence", action="store_true",
                       help="let inheritance cycles diverge until the step limit")
        p.add_argument("--builtin-types", help="comma-separated built-in resource types")

    c = sub.add_parser("compile", help="compile a manifest to a catalog")
    common(c)
    c.add_argument("--out", help="write the catalog here instead of stdout")
    c.add_argument("--trace", help="write one JSON record per step here")
    c.add_argument("--format", choices=("json", "pretty"), default="json")
    c.set_defaults(func=cmd_compile)

    a = sub.add_parser("audit", help="compile with determinism and monotonicity checks")
    common(a)
    a.set_defaults(func=cmd_audit)

    t = sub.add_parser("test", help="run a conformance corpus")
    t.add_argument("corpus", help="directory of cases")
    t.add_argument("--jobs", type=_positive, default=1)
    t.set_defaults(func=cmd_test)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
