"""Instrumented compilation: audit every step and check the state ordering."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional

from .. import syntax as S
from ..errors import CompileError, ErrorKind
from ..evaluator import EXPR, Configuration, Limits, compile, initial
from .audit import derivations
from .monotone import Violation, check_monotone

# Kinds raised on configurations where a rule's premises do hold:
# cycle detection pre-empts IncPU/CDecPU, and the step limit is not a stuck state.
NOT_STUCK = frozenset({ErrorKind.InheritanceCycle, ErrorKind.StepLimitExceeded})


@dataclass
class AuditReport:
    steps: int = 0
    determinism: List[str] = field(default_factory=list)
    monotonicity: List[Violation] = field(default_factory=list)
    purity: List[str] = field(default_factory=list)
    balance: List[str] = field(default_factory=list)
    error: Optional[CompileError] = None
    catalog: tuple = ()

    @property
    def ok(self) -> bool:
        return not (self.determinism or self.monotonicity or self.purity or self.balance)


def _same_config(c: Configuration, d) -> bool:
    return (c.sigma == d.sigma and c.kappa == d.kappa and c.catalog == d.catalog
            and c.term == d.term)


def audited_compile(manifest, node: str, facts=(), limits: Limits = Limits(),
                    builtin_types: Iterable[str] = S.BUILTIN_TYPES) -> AuditReport:
    """Compile with every step cross-checked by the auditor.

    At each step exactly one derivation must exist, it must match the
    stepper's path, and its result must equal the configuration the stepper
    reaches next. A finished run must have zero derivations left, and so
    must a stuck one (apart from NOT_STUCK kinds).
    """
    report = AuditReport()
    pending = []  # the derivation predicted for the previous step
    builtin = frozenset(builtin_types)
    last: List[Configuration] = []

    def on_step(config: Configuration, path):
        if pending:
            if not _same_config(config, pending[0]):
                report.determinism.append(f"step {report.steps}: result differs from the stepper")
            pending.clear()
        ds = derivations(config, None, builtin)
        report.steps += 1
        if len(ds) != 1:
            names = ["/".join(d.path) for d in ds]
            report.determinism.append(f"step {report.steps}: {len(ds)} derivations {names}")
        elif ds[0].path != path:
            report.determinism.append(
                f"step {report.steps}: auditor {'/'.join(ds[0].path)} vs stepper {'/'.join(path)}")
        else:
            pending.append(ds[0])
        last[:] = [config]

    try:
        result = compile(manifest, node, facts, limits, builtin, trace=True, keep_states=True,
                         on_step=on_step)
    except CompileError as err:
        report.error = err
        if err.kind not in NOT_STUCK:
            # the stuck configuration: the last pre-step config advanced by its
            # predicted derivation (or the initial one when no step was taken)
            stuck = _stuck_config(manifest, node, facts, pending, last)
            if stuck is not None:
                ds = derivations(stuck, None, builtin)
                if ds:
                    report.determinism.append(
                        f"stuck with {err.kind.value} but rules apply: {[ '/'.join(d.path) for d in ds]}")
        return report

    final = Configuration(result.sigma, result.kappa, result.catalog, S.SKIP, node)
    if pending and not _same_config(final, pending[0]):
        report.determinism.append("final step result differs from the stepper")
    if derivations(final, None, builtin):
        report.determinism.append("rules still apply to the final configuration")
    trace = result.trace
    report.monotonicity = check_monotone(trace.states)
    for rec, before, after in zip(trace.records, trace.states, trace.states[1:]):
        if rec.judgement == EXPR and not all(x is y for x, y in zip(before, after)):
            report.purity.append(f"expression step {rec.index} ({rec.rule}) changed the state")
    leftover = [str(scope) for scope in result.sigma if isinstance(scope, S.DefScope)]
    if leftover:
        report.balance.append(f"def scopes left bound: {leftover}")
    report.catalog = result.catalog
    return report


def _stuck_config(manifest, node, facts, pending, last) -> Optional[Configuration]:
    if pending:
        d = pending[0]
        return Configuration(d.sigma, d.kappa, d.catalog, d.term, node)
    if not last:
        return initial(manifest, node, facts)
    return None
