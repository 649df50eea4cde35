"""Semantics-guided synthesis over predicate selections."""

from .assertions import FAIL, VerificationCondition, pred_join, pred_leq, pred_meet, sel_leq
from .finite import FiniteDomain
from .parser import ParseError, SketchFile, load_sketch, parse_sketch
from .realizability import EngineConfig, UnjustifiedAnnotation, VcReport, discharge, gen_vcs, strongest_post
from .realization import SynResult, extract_program, gather, outl, syn
from .sketch import Choice, Com, Grammar, Hole, Seq, Star, derivable_programs, executions, oracle_programs

__version__ = "0.1.0"

__all__ = [
    "FAIL",
    "Choice",
    "Com",
    "EngineConfig",
    "FiniteDomain",
    "Grammar",
    "Hole",
    "ParseError",
    "Seq",
    "SketchFile",
    "Star",
    "SynResult",
    "UnjustifiedAnnotation",
    "VcReport",
    "VerificationCondition",
    "derivable_programs",
    "discharge",
    "executions",
    "extract_program",
    "gather",
    "gen_vcs",
    "load_sketch",
    "oracle_programs",
    "outl",
    "parse_sketch",
    "pred_join",
    "pred_leq",
    "pred_meet",
    "sel_leq",
    "strongest_post",
    "syn",
]
