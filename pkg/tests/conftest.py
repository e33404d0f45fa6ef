"""Shared fixtures: the frozen DIMACS corpus shipped under tests/corpus."""
from __future__ import annotations

import pathlib

import pytest

from rnqc import cnf

CORPUS_DIR = pathlib.Path(__file__).resolve().parent / "corpus"


def load_corpus(max_vars: int | None = None) -> list[tuple[str, cnf.CnfFormula]]:
    """All corpus formulas as (name, formula) pairs, sorted by file name."""
    out = []
    for path in sorted(CORPUS_DIR.glob("*.cnf")):
        formula = cnf.parse_dimacs(path.read_text())
        if max_vars is None or formula.num_vars <= max_vars:
            out.append((path.stem, formula))
    return out


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def corpus_mid():
    """Instances with at most 6 variables (the fidelity/oracle sweeps)."""
    return load_corpus(max_vars=6)


@pytest.fixture(scope="session")
def corpus_small():
    """Instances with at most 5 variables (the sampling sweeps)."""
    return load_corpus(max_vars=5)
