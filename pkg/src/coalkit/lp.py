"""Exact rational linear programming for small dense systems.

The solver is a two-phase tableau simplex with Bland's rule.  Tableau rows
are kept as lists of Python ints (each row may carry its own positive
scale), which avoids the gcd churn of Fraction arithmetic; no floating point
is used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from .errors import InputError, NotInfeasible

GE, LE, EQ = ">=", "<=", "=="
RELATIONS = (GE, LE, EQ)


@dataclass(frozen=True)
class LinConstraint:
    coeffs: tuple
    relation: str
    rhs: Fraction
    tag: object = None

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise InputError(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "coeffs", tuple(Fraction(a) for a in self.coeffs))
        object.__setattr__(self, "rhs", Fraction(self.rhs))

    def lhs(self, point: Sequence[Fraction]) -> Fraction:
        return sum((a * p for a, p in zip(self.coeffs, point) if a), Fraction(0))

    def holds(self, point: Sequence[Fraction]) -> bool:
        value = self.lhs(point)
        if self.relation == GE:
            return value >= self.rhs
        if self.relation == LE:
            return value <= self.rhs
        return value == self.rhs

    def strictly_holds(self, point: Sequence[Fraction]) -> bool:
        value = self.lhs(point)
        if self.relation == GE:
            return value > self.rhs
        if self.relation == LE:
            return value < self.rhs
        raise ValueError("equality constraints have no strict form")


@dataclass(frozen=True)
class LinSystem:
    n: int
    constraints: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise InputError("a linear system needs at least one variable")
        cons = tuple(self.constraints)
        for c in cons:
            if len(c.coeffs) != self.n:
                raise InputError(f"constraint {c.tag!r} has {len(c.coeffs)} coefficients, expected {self.n}")
        object.__setattr__(self, "constraints", cons)

    def __len__(self) -> int:
        return len(self.constraints)

    def subsystem(self, indices: Iterable[int]) -> "LinSystem":
        return LinSystem(self.n, tuple(self.constraints[k] for k in sorted(set(indices))))

    def add(self, *constraints: LinConstraint) -> "LinSystem":
        return LinSystem(self.n, self.constraints + tuple(constraints))

    def satisfied_by(self, point: Sequence[Fraction]) -> bool:
        return len(point) == self.n and all(c.holds(point) for c in self.constraints)

    @property
    def tags(self) -> list:
        return [c.tag for c in self.constraints]


@dataclass(frozen=True)
class LPOutcome:
    status: str  # "feasible" | "infeasible" | "unbounded"
    point: tuple | None = None
    value: Fraction | None = None
    ray: tuple | None = None

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


@dataclass(frozen=True)
class OpenResult:
    nonempty: bool
    point: tuple | None = None
    slack: Fraction | None = None

    def __bool__(self) -> bool:
        return self.nonempty


# Tableau simplex ---------------------------------------------------------------

def _int_row(values: Sequence[Fraction]) -> list:
    den = 1
    for v in values:
        den = lcm(den, v.denominator)
    return [v.numerator * (den // v.denominator) for v in values]


def _normalize(row: list) -> list:
    g = gcd(*row)
    if g > 1:
        return [a // g for a in row]
    return row


class _Tableau:
    """Integer tableau; column ``-1`` of each row is the right-hand side."""

    def __init__(self, rows: list, basis: list, ncols: int):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols
        self.obj = None
        self.obj_scale = 1

    def set_objective(self, costs: list) -> None:
        """Install ``maximize costs·z`` and price out the current basis."""
        obj = [-c for c in costs] + [0]
        scale = 1
        for r, b in enumerate(self.basis):
            a = obj[b]
            if a:
                row = self.rows[r]
                p = row[b]
                obj = [p * o - a * v for o, v in zip(obj, row)]
                scale *= p
                g = gcd(*obj, scale)
                if g > 1:
                    obj = [o // g for o in obj]
                    scale //= g
        self.obj = obj
        self.obj_scale = scale

    def objective_value(self) -> Fraction:
        return Fraction(self.obj[-1], self.obj_scale)

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        if prow[c] < 0:
            prow = [-a for a in prow]
        prow = _normalize(prow)
        self.rows[r] = prow
        p = prow[c]
        for k, row in enumerate(self.rows):
            if k == r:
                continue
            a = row[c]
            if a:
                self.rows[k] = _normalize([p * u - a * v for u, v in zip(row, prow)])
        if self.obj is not None:
            a = self.obj[c]
            if a:
                obj = [p * u - a * v for u, v in zip(self.obj, prow)]
                scale = self.obj_scale * p
                g = gcd(*obj, scale)
                if g > 1:
                    obj = [o // g for o in obj]
                    scale //= g
                self.obj, self.obj_scale = obj, scale
        self.basis[r] = c

    def run(self, allowed: list) -> str | int:
        """Maximize; returns ``"optimal"`` or the unbounded entering column."""
        while True:
            enter = None
            obj = self.obj
            for j in allowed:
                if obj[j] < 0:
                    enter = j
                    break
            if enter is None:
                return "optimal"
            leave = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a <= 0:
                    continue
                if leave is None:
                    leave = r
                    continue
                lrow = self.rows[leave]
                # compare row[-1]/a with lrow[-1]/lrow[enter]
                lhs = row[-1] * lrow[enter]
                rhs = lrow[-1] * a
                if lhs < rhs or (lhs == rhs and self.basis[r] < self.basis[leave]):
                    leave = r
            if leave is None:
                return enter
            self.pivot(leave, enter)

    def values(self) -> list:
        vals = [Fraction(0)] * self.ncols
        for r, b in enumerate(self.basis):
            row = self.rows[r]
            vals[b] = Fraction(row[-1], row[b])
        return vals


def _solve_standard(rows_in, n_vars: int, free: Sequence[bool], costs=None):
    """Core driver.

    ``rows_in`` is a list of ``(coeffs, relation, rhs)`` over ``n_vars``
    structural variables; ``free[k]`` says whether variable ``k`` is free or
    nonnegative.  Returns ``(status, values, ray)`` in structural space.
    """
    # structural columns: one per nonneg var, two (plus/minus) per free var
    col_of = []
    ncol = 0
    for k in range(n_vars):
        if free[k]:
            col_of.append((ncol, ncol + 1))
            ncol += 2
        else:
            col_of.append((ncol, None))
            ncol += 1
    n_struct = ncol

    prepared = []
    for coeffs, rel, rhs in rows_in:
        ints = _int_row(list(coeffs) + [rhs])
        a, b = ints[:-1], ints[-1]
        if b < 0:
            a = [-v for v in a]
            b = -b
            rel = {GE: LE, LE: GE, EQ: EQ}[rel]
        prepared.append((a, rel, b))

    n_slack = sum(1 for _, rel, _ in prepared if rel != EQ)
    n_art = sum(1 for _, rel, b in prepared if rel != LE)
    total = n_struct + n_slack + n_art
    rows, basis = [], []
    s_col = n_struct
    a_col = n_struct + n_slack
    art_cols = []
    for a, rel, b in prepared:
        row = [0] * (total + 1)
        for k, v in enumerate(a):
            plus, minus = col_of[k]
            row[plus] = v
            if minus is not None:
                row[minus] = -v
        row[-1] = b
        if rel == LE:
            row[s_col] = 1
            basis.append(s_col)
            s_col += 1
        else:
            if rel == GE:
                row[s_col] = -1
                s_col += 1
            row[a_col] = 1
            basis.append(a_col)
            art_cols.append(a_col)
            a_col += 1
        rows.append(row)

    tab = _Tableau(rows, basis, total)
    real_cols = list(range(n_struct + n_slack))
    if art_cols:
        phase1 = [0] * total
        for c in art_cols:
            phase1[c] = -1
        tab.set_objective(phase1)
        tab.run(list(range(total)))
        if tab.objective_value() < 0:
            return "infeasible", None, None
        # drive zero-level artificials out of the basis
        art = set(art_cols)
        r = 0
        while r < len(tab.rows):
            if tab.basis[r] in art:
                row = tab.rows[r]
                col = next((j for j in real_cols if row[j] != 0), None)
                if col is None:
                    del tab.rows[r]
                    del tab.basis[r]
                    continue
                tab.pivot(r, col)
            r += 1

    ray = None
    if costs is None:
        status = "feasible"
    else:
        obj = [0] * total
        for k, c in enumerate(costs):
            c = Fraction(c)
            plus, minus = col_of[k]
            obj[plus] = c
            if minus is not None:
                obj[minus] = -c
        den = 1
        for v in obj:
            den = lcm(den, Fraction(v).denominator)
        obj = [int(Fraction(v) * den) for v in obj]
        tab.set_objective(obj)
        result = tab.run(real_cols)
        if result == "optimal":
            status = "feasible"
        else:
            status = "unbounded"
            enter = result
            direction = [Fraction(0)] * total
            direction[enter] = Fraction(1)
            for r, b in enumerate(tab.basis):
                row = tab.rows[r]
                direction[b] = -Fraction(row[enter], row[b])
            ray = direction

    vals = tab.values()

    def to_struct(vec):
        out = []
        for plus, minus in col_of:
            v = vec[plus]
            if minus is not None:
                v -= vec[minus]
            out.append(v)
        return tuple(out)

    return status, to_struct(vals), (to_struct(ray) if ray is not None else None)


def _rows(sys: LinSystem) -> list:
    return [(c.coeffs, c.relation, c.rhs) for c in sys.constraints]


def solve(sys: LinSystem, objective: Sequence | None = None, sense: str = "max") -> LPOutcome:
    """Exact feasibility / optimization over free variables.

    Without an objective this is a pure feasibility check.  Any returned
    point satisfies every constraint exactly.
    """
    if sense not in ("max", "min"):
        raise InputError(f"sense must be 'max' or 'min', got {sense!r}")
    costs = None
    if objective is not None:
        if len(objective) != sys.n:
            raise InputError("objective dimension mismatch")
        costs = [Fraction(c) if sense == "max" else -Fraction(c) for c in objective]
    status, point, ray = _solve_standard(_rows(sys), sys.n, [True] * sys.n, costs)
    if status == "infeasible":
        return LPOutcome("infeasible")
    assert sys.satisfied_by(point), "simplex returned an infeasible point"
    value = None
    if objective is not None and status == "feasible":
        value = sum((Fraction(c) * p for c, p in zip(objective, point)), Fraction(0))
    return LPOutcome(status, point, value, ray)


def is_feasible(sys: LinSystem) -> bool:
    if not sys.constraints:
        return True
    return solve(sys).feasible


# Infeasible subsystems ----------------------------------------------------------

def _farkas_support(sys: LinSystem) -> list:
    """Constraint indices in the support of a vertex Farkas certificate.

    Every constraint is read as one or two ``a·x >= b`` rows; the system is
    infeasible iff some ``y >= 0`` has ``yᵀA = 0`` and ``yᵀb = 1``.  Basic
    solutions of that system have irreducible supports, so this is usually
    already an IIS; the caller still runs a deletion filter.
    """
    ge_rows = []
    owner = []
    for k, c in enumerate(sys.constraints):
        if c.relation in (GE, EQ):
            ge_rows.append((c.coeffs, c.rhs))
            owner.append(k)
        if c.relation in (LE, EQ):
            ge_rows.append((tuple(-a for a in c.coeffs), -c.rhs))
            owner.append(k)
    m = len(ge_rows)
    rows = []
    for var in range(sys.n):
        rows.append(([a[var] for a, _ in ge_rows], EQ, Fraction(0)))
    rows.append(([b for _, b in ge_rows], EQ, Fraction(1)))
    status, y, _ = _solve_standard(rows, m, [False] * m)
    if status == "infeasible":
        return []
    return sorted({owner[r] for r in range(m) if y[r] != 0})


def extract_iis(sys: LinSystem, protected: Iterable = ()) -> LinSystem:
    """Inclusion-minimal infeasible subsystem keeping every protected tag.

    Minimality is with respect to the unprotected constraints: dropping any
    one of them makes the output feasible.  When the protected constraints
    are themselves necessary (the system without them is feasible) the output
    is a true IIS, so by Helly it has at most ``n + 1`` members.
    """
    protected = set(protected)
    if is_feasible(sys):
        raise NotInfeasible("system is feasible")
    keep = [k for k, c in enumerate(sys.constraints) if c.tag in protected]
    seed = _farkas_support(sys)
    current = sorted(set(seed) | set(keep))
    if is_feasible(sys.subsystem(current)):
        current = list(range(len(sys.constraints)))
    for k in list(current):
        if k in keep:
            continue
        trial = [i for i in current if i != k]
        if not is_feasible(sys.subsystem(trial)):
            current = trial
    loose = [k for k in current if k not in keep]
    if len(keep) == 1 and is_feasible(sys.subsystem(loose)):
        # the protected row is needed, so this is a true IIS: at most n + 1 rows
        assert len(loose) <= sys.n, "IIS exceeds the Helly bound"
    return sys.subsystem(current)


def is_irreducible(sys: LinSystem, protected: Iterable = ()) -> bool:
    """Infeasible, and each single unprotected deletion restores feasibility."""
    protected = set(protected)
    if is_feasible(sys):
        return False
    for k, c in enumerate(sys.constraints):
        if c.tag in protected:
            continue
        rest = [i for i in range(len(sys.constraints)) if i != k]
        if not is_feasible(sys.subsystem(rest)):
            return False
    return True


# Strict inequalities --------------------------------------------------------------

def tightened(sys: LinSystem, strict: Iterable[int]) -> LinSystem:
    """Append a slack variable and tighten each strict row by it."""
    strict = set(strict)
    cons = []
    for k, c in enumerate(sys.constraints):
        coeffs = c.coeffs + (Fraction(0),)
        if k in strict:
            if c.relation == GE:
                coeffs = c.coeffs + (Fraction(-1),)
            elif c.relation == LE:
                coeffs = c.coeffs + (Fraction(1),)
            else:
                raise InputError("an equality cannot be strict")
        cons.append(LinConstraint(coeffs, c.relation, c.rhs, c.tag))
    return LinSystem(sys.n + 1, tuple(cons))


def open_feasible(sys: LinSystem, strict: Iterable[int]) -> OpenResult:
    """Decide nonemptiness when the rows in ``strict`` are strict inequalities.

    The strict system is nonempty iff the tightened closed system admits a
    positive slack; the slack is maximized and, if unbounded, capped at 1.
    """
    strict = sorted(set(strict))
    tight = tightened(sys, strict)
    objective = [0] * sys.n + [1]
    outcome = solve(tight, objective)
    if outcome.status == "infeasible":
        return OpenResult(False)
    if outcome.status == "unbounded":
        cap = LinConstraint(tuple([0] * sys.n + [1]), LE, 1, tag="slack-cap")
        outcome = solve(tight.add(cap), objective)
    delta = outcome.point[-1]
    if delta <= 0:
        return OpenResult(False, slack=delta)
    point = outcome.point[:-1]
    strict_set = set(strict)
    assert all(c.strictly_holds(point) if k in strict_set else c.holds(point)
               for k, c in enumerate(sys.constraints))
    return OpenResult(True, point, delta)
