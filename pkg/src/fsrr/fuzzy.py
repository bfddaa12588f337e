"""Crisp-interval fuzzy controllers for route-request priority.

Each crisp input is cut into four equal ranges, graded ``a < b < c < d``,
and the grades are combined through fixed 4x4 lookup tables. There are no
membership functions and no defuzzification: the scheduler consumes the
final ordinal grade directly.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Optional


class Grade(enum.IntEnum):
    A = 0
    B = 1
    C = 2
    D = 3

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "Grade":
        return cls[text.strip().upper()]


# Rows are the second argument, columns the first: TABLES[name][row][col].
_RAW_TABLES = {
    # columns RTR, rows AST -> temp1
    "table1": ("abbb", "bbbc", "bbcd", "bcdd"),
    # columns temp1, rows CDHT -> TQ
    "table2": ("aabc", "abcc", "abcd", "bcdd"),
    # columns DECR, rows DR -> PQ
    "table3": ("ddcb", "dccb", "ccba", "bbba"),
    # columns TQ, rows PQ -> delay
    "table4": ("aabc", "aacd", "bbcd", "bbdd"),
}

TABLES: dict[str, tuple[tuple[Grade, ...], ...]] = {
    name: tuple(tuple(Grade.parse(ch) for ch in row) for row in rows)
    for name, rows in _RAW_TABLES.items()
}

TABLE_AXES = {
    "table1": ("RTR", "AST", "temp1"),
    "table2": ("temp1", "CDHT", "TQ"),
    "table3": ("DECR", "DR", "PQ"),
    "table4": ("TQ", "PQ", "delay"),
}


def _lookup(name: str, col: Grade, row: Grade) -> Grade:
    return TABLES[name][row][col]


def table1(rtr: Grade, ast: Grade) -> Grade:
    return _lookup("table1", rtr, ast)


def table2(temp1: Grade, cdht: Grade) -> Grade:
    return _lookup("table2", temp1, cdht)


def table3(decr: Grade, dr: Grade) -> Grade:
    return _lookup("table3", decr, dr)


def table4(tq: Grade, pq: Grade) -> Grade:
    return _lookup("table4", tq, pq)


def _clamp(x: float, lo: float, hi: float, counter: Optional[Counter], key: str) -> float:
    if x < lo or x > hi:
        if counter is not None:
            counter[key] += 1
        return min(max(x, lo), hi)
    return x


def fuzzify_unit(x: float, counter: Optional[Counter] = None, key: str = "unit") -> Grade:
    """Grade a value in [0, 1] by quarters, lower-inclusive, 1.0 maps to d."""
    x = _clamp(x, 0.0, 1.0, counter, key)
    if x < 0.25:
        return Grade.A
    if x < 0.5:
        return Grade.B
    if x < 0.75:
        return Grade.C
    return Grade.D


def fuzzify_cdht(x: float, maxval: float, counter: Optional[Counter] = None) -> Grade:
    if maxval <= 0:
        return Grade.A
    x = _clamp(x, 0.0, maxval, counter, "cdht")
    # compare against scaled boundaries so x == maxval/4 lands on b exactly
    if x < maxval / 4:
        return Grade.A
    if x < maxval / 2:
        return Grade.B
    if x < 3 * maxval / 4:
        return Grade.C
    return Grade.D


@dataclass(frozen=True)
class ControllerTrace:
    rtr_grade: Grade
    ast_grade: Grade
    cdht_grade: Grade
    temp1: Grade
    tq: Grade
    decr_grade: Grade
    dr_grade: Grade
    pq: Grade
    delay: Grade

    def as_dict(self) -> dict[str, str]:
        return {k: str(v) for k, v in self.__dict__.items()}


def evaluate(
    rtr: float,
    ast: float,
    cdht: float,
    maxval: float,
    decr: float,
    dr: float,
    counter: Optional[Counter] = None,
) -> ControllerTrace:
    """Run the time-efficiency, position-efficiency and scheduler tables."""
    rtr_g = fuzzify_unit(rtr, counter, "rtr")
    ast_g = fuzzify_unit(ast, counter, "ast")
    cdht_g = fuzzify_cdht(cdht, maxval, counter)
    decr_g = fuzzify_unit(decr, counter, "decr")
    dr_g = fuzzify_unit(dr, counter, "dr")
    temp1 = table1(rtr_g, ast_g)
    tq = table2(temp1, cdht_g)
    pq = table3(decr_g, dr_g)
    return ControllerTrace(
        rtr_grade=rtr_g,
        ast_grade=ast_g,
        cdht_grade=cdht_g,
        temp1=temp1,
        tq=tq,
        decr_grade=decr_g,
        dr_grade=dr_g,
        pq=pq,
        delay=table4(tq, pq),
    )


def format_table(name: str) -> str:
    col_name, row_name, out_name = TABLE_AXES[name]
    lines = [f"{name}: {col_name} (columns) x {row_name} (rows) -> {out_name}"]
    lines.append(f"{row_name:>6} | " + " ".join(str(g) for g in Grade))
    for row in Grade:
        cells = " ".join(str(TABLES[name][row][col]) for col in Grade)
        lines.append(f"{str(row):>6} | {cells}")
    return "\n".join(lines)
