"""Runtime checks of determinism and monotonicity, plus a manifest generator."""

from .audit import Derivation, audit_step, derivations
from .generator import FAULT_KINDS, GenConfig, gen_manifest, planned_fault, shrink
from .harness import AuditReport, audited_compile
from .monotone import Violation, check_monotone

__all__ = [
    "AuditReport", "Derivation", "FAULT_KINDS", "GenConfig", "Violation", "audit_step",
    "audited_compile", "check_monotone", "derivations", "gen_manifest", "planned_fault", "shrink",
]
