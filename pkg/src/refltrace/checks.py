"""Residual rows and the reports that collect them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TOL_AXIOM = 1e-12
TOL_COMPOSITE = 1e-10


@dataclass
class Check:
    """One identity evaluated on a batch of spectral samples."""

    tag: str
    name: str
    residual: float
    tol: float
    samples: int = 1
    scalars: list[complex] = field(default_factory=list)
    note: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tol

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "name": self.name,
            "samples": self.samples,
            "residual": self.residual,
            "tol": self.tol,
            "passed": self.passed,
            "scalars": [[z.real, z.imag] for z in self.scalars],
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Check:
        return cls(
            tag=d["tag"],
            name=d["name"],
            residual=d["residual"],
            tol=d["tol"],
            samples=d["samples"],
            scalars=[complex(re, im) for re, im in d.get("scalars", [])],
            note=d.get("note", ""),
        )


def gather(tag: str, name: str, residuals, tol: float, scalars=(), note: str = "") -> Check:
    """Collapse per-sample residuals into one row carrying the maximum."""
    residuals = list(residuals)
    worst = max(residuals) if residuals else 0.0
    if any(not math.isfinite(r) for r in residuals):
        worst = math.inf
    return Check(tag, name, float(worst), tol, len(residuals), [complex(z) for z in scalars], note)


@dataclass
class AxiomReport:
    """Rows of named identities plus constants extracted along the way."""

    rows: list[Check] = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[Check]:
        return [r for r in self.rows if not r.passed]

    def row(self, tag: str) -> Check:
        for r in self.rows:
            if r.tag == tag:
                return r
        raise KeyError(tag)

    def extend(self, other: AxiomReport) -> None:
        self.rows.extend(other.rows)
        self.constants.update(other.constants)
