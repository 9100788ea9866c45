"""Hypothesis text -> constraint matrices.

Grammar (whitespace is insignificant everywhere):

    hypotheses := hypothesis (";" hypothesis)*
    hypothesis := operand (cmp operand)+
    cmp        := "=" | "<" | ">"
    operand    := name | number | "(" name ("," name)* ")"

A chain compares adjacent operands pairwise: ``x1 > x2 > 0`` states
``x1 > x2`` and ``x2 > 0``.  A parenthesized group distributes over the
other side of its comparison, cartesian style: ``(a,b) > c`` gives the
rows ``a > c`` and ``b > c``, and ``(a,b) > (c,d)`` gives all four pairs.
``<`` is normalized away, so every inequality row is stored in the
``R_I beta > r_I`` direction.  Row order follows the text left to right,
group members expanding left operand outermost.

The intercept is addressed by the literal name ``(Intercept)``.  The
special text ``exploratory`` is not a hypothesis; callers check
:func:`is_exploratory` before parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import (
    HypothesisSyntaxError,
    InconsistentEqualityError,
    InfeasibleHypothesisError,
)
from .numkernel import null_space_basis, pseudo_inverse

EXPLORATORY = "exploratory"

_INTERCEPT = "(Intercept)"
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
_NUM_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


def is_exploratory(text: str) -> bool:
    """True when the hypothesis text requests the exploratory mode."""
    return text.strip().lower() == EXPLORATORY


@dataclass(frozen=True)
class ConstraintSystem:
    """One hypothesis as matrices: ``R_E beta = r_E`` and ``R_I beta > r_I``.

    ``source`` is the canonical text (whitespace stripped) the system was
    parsed from; rendering it and reparsing reproduces the matrices.
    """

    label: str
    source: str
    R_E: np.ndarray
    r_E: np.ndarray
    R_I: np.ndarray
    r_I: np.ndarray

    def __post_init__(self):
        RE = np.asarray(self.R_E, dtype=float)
        RI = np.asarray(self.R_I, dtype=float)
        rE = np.atleast_1d(np.asarray(self.r_E, dtype=float))
        rI = np.atleast_1d(np.asarray(self.r_I, dtype=float))
        if RE.ndim != 2 or RI.ndim != 2 or RE.shape[1] != RI.shape[1]:
            raise HypothesisSyntaxError("constraint matrices must share a width")
        if RE.shape[0] != rE.shape[0] or RI.shape[0] != rI.shape[0]:
            raise HypothesisSyntaxError("constraint bounds have the wrong length")
        if RE.shape[0] + RI.shape[0] < 1:
            raise HypothesisSyntaxError("a hypothesis needs at least one constraint")
        for row in list(RE) + list(RI):
            if not np.any(row):
                raise HypothesisSyntaxError("all constraint rows must be nonzero")
        object.__setattr__(self, "R_E", RE)
        object.__setattr__(self, "r_E", rE)
        object.__setattr__(self, "R_I", RI)
        object.__setattr__(self, "r_I", rI)

    @property
    def q_E(self) -> int:
        return self.R_E.shape[0]

    @property
    def q_I(self) -> int:
        return self.R_I.shape[0]

    @property
    def k(self) -> int:
        return self.R_E.shape[1]


@dataclass(frozen=True)
class ValidationReport:
    """Diagnostics from :func:`validate`: ranks and reduction notes."""

    label: str
    rank_equalities: int
    rank_inequalities_reduced: int
    n_trivial_rows: int
    q_E: int
    q_I: int


# --- lexing -----------------------------------------------------------

def _lex(text: str, label: str):
    """Tokenize a whitespace-free hypothesis segment."""
    toks = []
    i = 0
    while i < len(text):
        if text.startswith(_INTERCEPT, i):
            toks.append(("name", _INTERCEPT))
            i += len(_INTERCEPT)
            continue
        c = text[i]
        if c in "<>=":
            toks.append(("cmp", c))
            i += 1
        elif c == "(":
            toks.append(("lparen", c))
            i += 1
        elif c == ")":
            toks.append(("rparen", c))
            i += 1
        elif c == ",":
            toks.append(("comma", c))
            i += 1
        elif c.isalpha() or c == "_":
            m = _NAME_RE.match(text, i)
            toks.append(("name", m.group(0)))
            i = m.end()
        elif c.isdigit() or c in "+-.":
            m = _NUM_RE.match(text, i)
            if not m:
                raise HypothesisSyntaxError(
                    f"{label}: malformed token at {text[i:]!r}"
                )
            toks.append(("num", m.group(0)))
            i = m.end()
        else:
            raise HypothesisSyntaxError(f"{label}: malformed token at {text[i:]!r}")
    return toks


# --- segment parsing --------------------------------------------------

def _parse_operand(toks, pos, coef_names, label):
    """Return ((names, const), next_pos); one of names/const is None."""
    kind, val = toks[pos] if pos < len(toks) else ("end", "")
    if kind == "name":
        _check_name(val, coef_names, label)
        return ([val], None), pos + 1
    if kind == "num":
        return (None, float(val)), pos + 1
    if kind == "lparen":
        names = []
        pos += 1
        while True:
            kind, val = toks[pos] if pos < len(toks) else ("end", "")
            if kind != "name":
                raise HypothesisSyntaxError(
                    f"{label}: groups may contain coefficient names only"
                )
            _check_name(val, coef_names, label)
            names.append(val)
            pos += 1
            kind, val = toks[pos] if pos < len(toks) else ("end", "")
            if kind == "comma":
                pos += 1
                continue
            if kind == "rparen":
                return (names, None), pos + 1
            raise HypothesisSyntaxError(f"{label}: expected ',' or ')' in group")
    raise HypothesisSyntaxError(f"{label}: expected a coefficient name or number")


def _check_name(name, coef_names, label):
    if name not in coef_names:
        known = ", ".join(coef_names)
        raise HypothesisSyntaxError(
            f"{label}: unknown coefficient name {name!r}; model has: {known}"
        )


def _normalized(row, rhs):
    """Sign-normalized copy for duplicate detection: first nonzero > 0."""
    idx = np.flatnonzero(row)[0]
    if row[idx] < 0:
        return tuple(-row), -rhs
    return tuple(row), rhs


def _parse_segment(segment: str, coef_names, label: str) -> ConstraintSystem:
    text = "".join(segment.split())
    if not text:
        raise HypothesisSyntaxError(f"{label}: empty hypothesis segment")
    toks = _lex(text, label)
    operands, cmps = [], []
    operand, pos = _parse_operand(toks, 0, coef_names, label)
    operands.append(operand)
    while pos < len(toks):
        kind, val = toks[pos]
        if kind != "cmp":
            raise HypothesisSyntaxError(f"{label}: expected '=', '<' or '>'")
        cmps.append(val)
        operand, pos = _parse_operand(toks, pos + 1, coef_names, label)
        operands.append(operand)
    if len(operands) < 2:
        raise HypothesisSyntaxError(
            f"{label}: a hypothesis must contain at least one comparison"
        )

    k = len(coef_names)
    index = {name: j for j, name in enumerate(coef_names)}
    eq_rows, eq_rhs, ineq_rows, ineq_rhs = [], [], [], []
    for left, op, right in zip(operands, cmps, operands[1:]):
        if op == "<":
            left, right = right, left
            op = ">"
        l_items = left[0] if left[0] is not None else [left[1]]
        r_items = right[0] if right[0] is not None else [right[1]]
        for li in l_items:
            for ri in r_items:
                row = np.zeros(k)
                rhs = 0.0
                if isinstance(li, str):
                    row[index[li]] += 1.0
                else:
                    rhs -= li
                if isinstance(ri, str):
                    row[index[ri]] -= 1.0
                else:
                    rhs += ri
                if not np.any(row):
                    raise HypothesisSyntaxError(
                        f"{label}: comparison has no coefficient content"
                    )
                if op == ">":
                    ineq_rows.append(row)
                    ineq_rhs.append(rhs)
                else:
                    eq_rows.append(row)
                    eq_rhs.append(rhs)

    # Collapse duplicate equality rows; a repeated row with a different
    # bound is a contradiction, a linearly dependent row must agree with
    # the combination it repeats.
    seen = {}
    kept_rows, kept_rhs = [], []
    for row, rhs in zip(eq_rows, eq_rhs):
        key_row, key_rhs = _normalized(row, rhs)
        if key_row in seen:
            if abs(seen[key_row] - key_rhs) > 1e-9 * (1.0 + abs(key_rhs)):
                raise InconsistentEqualityError(
                    f"{label}: contradictory equality constraints"
                )
            continue
        seen[key_row] = key_rhs
        kept_rows.append(row)
        kept_rhs.append(rhs)
    if kept_rows:
        A = np.array(kept_rows)
        b = np.array(kept_rhs)
        rank = np.linalg.matrix_rank(A)
        if rank < len(kept_rows):
            sol, *_ = np.linalg.lstsq(A, b, rcond=None)
            if not np.allclose(A @ sol, b, atol=1e-9, rtol=1e-9):
                raise InconsistentEqualityError(
                    f"{label}: contradictory equality constraints"
                )
            ind_rows, ind_rhs = [], []
            for row, rhs in zip(kept_rows, kept_rhs):
                trial = np.array(ind_rows + [row])
                if np.linalg.matrix_rank(trial) > len(ind_rows):
                    ind_rows.append(row)
                    ind_rhs.append(rhs)
            kept_rows, kept_rhs = ind_rows, ind_rhs

    RE = np.array(kept_rows) if kept_rows else np.zeros((0, k))
    rE = np.array(kept_rhs) if kept_rhs else np.zeros(0)
    RI = np.array(ineq_rows) if ineq_rows else np.zeros((0, k))
    rI = np.array(ineq_rhs) if ineq_rhs else np.zeros(0)
    return ConstraintSystem(label, text, RE, rE, RI, rI)


def parse_hypotheses(text: str, coef_names) -> list:
    """Parse semicolon-separated hypothesis text into constraint systems.

    Labels run H1, H2, ... in textual order.  The special text
    ``exploratory`` contains no constraint systems and yields an empty
    list; use :func:`is_exploratory` to detect it up front.
    """
    coef_names = tuple(coef_names)
    if is_exploratory(text):
        return []
    segments = text.split(";")
    systems = []
    for i, segment in enumerate(segments, start=1):
        systems.append(_parse_segment(segment, coef_names, f"H{i}"))
    return systems


def render(cs: ConstraintSystem) -> str:
    """Canonical text for a parsed system (reparses to the same matrices)."""
    return cs.source


# --- validation -------------------------------------------------------

def validate(cs: ConstraintSystem) -> ValidationReport:
    """Check a constraint system for feasibility and report its structure.

    Equalities are substituted into the inequalities; a row that reduces
    to ``0 > c`` with ``c >= 0`` or an inequality system with an empty
    interior raises :class:`InfeasibleHypothesisError`.  Rows that reduce
    to a vacuously true statement are counted in ``n_trivial_rows``.
    """
    rank_eq = int(np.linalg.matrix_rank(cs.R_E)) if cs.q_E else 0
    if cs.q_E and rank_eq < cs.q_E:
        raise InconsistentEqualityError(
            f"{cs.label}: equality rows are linearly dependent"
        )
    if cs.q_I == 0:
        return ValidationReport(cs.label, rank_eq, 0, 0, cs.q_E, cs.q_I)

    if cs.q_E:
        D = null_space_basis(cs.R_E)
        Rt = cs.R_I @ pseudo_inverse(D)
        rt = cs.r_I - cs.R_I @ pseudo_inverse(cs.R_E) @ cs.r_E
    else:
        Rt = cs.R_I
        rt = cs.r_I

    norms = np.linalg.norm(Rt, axis=1) if Rt.shape[1] else np.zeros(cs.q_I)
    live = norms > 1e-9 * max(1.0, float(norms.max(initial=0.0)))
    tol = 1e-9 * (1.0 + float(np.abs(rt).max(initial=0.0)))
    for i in np.flatnonzero(~live):
        if rt[i] >= -tol:
            raise InfeasibleHypothesisError(
                f"{cs.label}: after substituting the equalities, an "
                f"inequality reduces to 0 > {rt[i]:g}"
            )
    n_trivial = int(np.sum(~live))
    active_R = Rt[live]
    active_r = rt[live]
    rank_ineq = int(np.linalg.matrix_rank(active_R)) if active_R.size else 0

    if active_R.shape[0]:
        # Strict feasibility: maximize the slack t subject to
        # Rt xi >= rt + t; an optimum at or below zero means the open
        # region is empty.
        q, d = active_R.shape
        res = linprog(
            c=np.append(np.zeros(d), -1.0),
            A_ub=np.hstack([-active_R, np.ones((q, 1))]),
            b_ub=-active_r,
            bounds=[(None, None)] * d + [(None, 1.0)],
            method="highs",
        )
        slack = -res.fun if res.status == 0 else -np.inf
        if slack <= 1e-9 * (1.0 + float(np.abs(active_r).max(initial=0.0))):
            raise InfeasibleHypothesisError(
                f"{cs.label}: the inequality system has an empty interior"
            )
    return ValidationReport(cs.label, rank_eq, rank_ineq, n_trivial, cs.q_E, cs.q_I)
