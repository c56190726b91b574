"""Toolkit for timed communicating component models (.coda files).

The pieces: a block-structured DSL with hierarchical state machines
(`coda.parser`, `coda.printer`), validation and the expression language
(`coda.validate`, `coda.exprs`), a discrete-time execution kernel
(`coda.kernel`, `coda.runner`), a bounded explicit-state checker
(`coda.checker`), a bounded refinement checker (`coda.refine`), an Event-B
text emitter (`coda.eventb`), golden-trace regression (`coda.golden`) and a
CLI plus local HTTP service for interactive animation (`coda.cli`,
`coda.server`).
"""

from .diagnostics import (CodaError, DeadlockReached, Diagnostic, KernelError,
                          ModelError, NotEnabled, ParseFailure, SourceSpan)
from .kernel import (RunConfig, RuntimeState, SEMANTICS_VERSION, enabled,
                     enabled_events, fire, init, recv_value, tick)
from .loader import load_model, load_refinement, shipped_model_path
from .parser import parse, parse_file
from .printer import print_model
from .runner import Scenario, Trace, parse_scenario, run
from .validate import diagnose, validate

__all__ = [
    "CodaError", "DeadlockReached", "Diagnostic", "KernelError", "ModelError",
    "NotEnabled", "ParseFailure", "SourceSpan", "RunConfig", "RuntimeState",
    "SEMANTICS_VERSION", "enabled", "enabled_events", "fire", "init",
    "recv_value", "tick", "load_model", "load_refinement",
    "shipped_model_path", "parse", "parse_file", "print_model", "Scenario",
    "Trace", "parse_scenario", "run", "diagnose", "validate",
]

__version__ = "1.0.0"
