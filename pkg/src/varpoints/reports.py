"""Report records shared by the counting, exponential-sum and family
modules, plus the CSV/JSON serialization used by the CLI.

Every numeric row carries a budget_formula tag so no reported number is
separated from the bound it was measured against.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def fmt_number(x) -> str:
    """Deterministic text form: integers verbatim, floats at 12 significant
    digits (stable across runs and platforms for our value ranges)."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


@dataclass
class CountReport:
    """Exact count against its asymptotic main term and error budget.

    deviation = exact - main_term; normalized = |deviation| / budget.
    extras carries secondary labeled values (alternative budget constants,
    flags) that accompany the row in serialized output.
    """

    label: str
    p: int
    kind: str
    exact: int
    main_term: float
    budget: float
    budget_formula: str
    extras: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.budget <= 0:
            raise ValueError(f"budget must be positive, got {self.budget}")

    @property
    def deviation(self) -> float:
        return self.exact - self.main_term

    @property
    def normalized(self) -> float:
        return abs(self.deviation) / self.budget

    def row(self) -> dict:
        d = {
            "label": self.label,
            "p": self.p,
            "kind": self.kind,
            "exact": self.exact,
            "main_term": self.main_term,
            "deviation": self.deviation,
            "normalized": self.normalized,
            "budget": self.budget,
            "budget_formula": self.budget_formula,
        }
        d.update(self.extras)
        return d


@dataclass
class ExpSumRecord:
    """One complete exponential sum S(u) = sum over V of e_p(u . x)."""

    p: int
    u: tuple[int, ...]
    value: complex
    bound: float
    bound_kind: str

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def ratio(self) -> float:
        return self.magnitude / self.bound if self.bound > 0 else 0.0

    @property
    def exceeds_bound(self) -> bool:
        """True when the measured magnitude falsifies the asserted bound."""
        return self.ratio > 1.0

    def row(self) -> dict:
        return {
            "p": self.p,
            "u": ";".join(str(c) for c in self.u),
            "re": self.value.real,
            "im": self.value.imag,
            "magnitude": self.magnitude,
            "bound": self.bound,
            "ratio": self.ratio,
            "bound_kind": self.bound_kind,
        }


def rows_to_csv(rows: list[dict]) -> str:
    """Render dict rows as CSV; the header is the union of row keys in
    first-appearance order, and absent cells are left empty."""
    if not rows:
        return ""
    header: list[str] = []
    seen = set()
    for row in rows:
        for k in row:
            if k not in seen:
                seen.add(k)
                header.append(k)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_number(row[k]) if k in row else "" for k in header))
    return "\n".join(lines) + "\n"
