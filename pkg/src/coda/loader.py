"""File-level helpers: load models, resolve refinement chains, locate the
shipped example models."""

from __future__ import annotations

import os
from importlib import resources

from .diagnostics import RefinementSpecError
from .parser import parse_file, parse_refinement_file
from .refine import RefinementSpec, build_spec
from .validate import validate


def load_model(path, validated=True):
    model = parse_file(path)
    return validate(model) if validated else model


def load_refinement(concrete_path, spec_path=None) -> RefinementSpec:
    """Refinement pairing for a concrete model file: either from its inline
    refines clause or from a standalone .refines companion."""
    concrete = load_model(concrete_path)
    base = os.path.dirname(os.path.abspath(concrete_path))
    clause = concrete.refines
    if spec_path is not None:
        with open(spec_path, encoding="utf-8") as fh:
            abstract_rel, _, clause = parse_refinement_file(
                fh.read(), file=str(spec_path))
        base = os.path.dirname(os.path.abspath(spec_path))
    if clause is None:
        raise RefinementSpecError(
            f"{concrete_path} declares no refines clause and no companion "
            "spec was given")
    abstract = load_model(os.path.join(base, clause.abstract_path))
    return build_spec(concrete, abstract, clause)


def shipped_model_path(name: str) -> str:
    """Absolute path of a shipped example model or scenario by file name."""
    pkg = resources.files("coda") / "models" / name
    return str(pkg)


def shipped_models():
    pkg = resources.files("coda") / "models"
    return sorted(p.name for p in pkg.iterdir() if p.name.endswith(".coda"))
