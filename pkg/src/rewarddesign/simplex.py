"""Dense two-phase simplex for small linear programs.

Problems are posed as ``maximize c.x`` subject to ``A x <= b`` and box bounds
``lower <= x <= upper`` (lower bounds finite, upper bounds may be ``inf``).
Pivoting uses Bland's rule, so degenerate problems cannot cycle. Once the
optimal basis is known, the basic solution is recomputed from the original
data to remove round-off accumulated in the tableau.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LpProblem:
    objective: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    variable_names: tuple = field(default=())

    def __post_init__(self):
        c = np.asarray(self.objective, float).ravel()
        n = c.size
        a = np.asarray(self.a_ub, float).reshape(-1, n)
        b = np.asarray(self.b_ub, float).ravel()
        lo = np.broadcast_to(np.asarray(self.lower, float), (n,)).copy()
        up = np.broadcast_to(np.asarray(self.upper, float), (n,)).copy()
        if b.size != a.shape[0]:
            raise ValueError("a_ub and b_ub disagree on the number of rows")
        if np.any(lo > up):
            raise ValueError("lower bound exceeds upper bound")
        names = tuple(self.variable_names) or tuple(f"x{j}" for j in range(n))
        if len(names) != n:
            raise ValueError("one name per variable required")
        for name, val in (("objective", c), ("a_ub", a), ("b_ub", b), ("lower", lo),
                          ("upper", up), ("variable_names", names)):
            if isinstance(val, np.ndarray):
                val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.a_ub.shape[0]

    @property
    def constraints(self):
        return [(self.a_ub[i], float(self.b_ub[i])) for i in range(self.n_rows)]

    def dump(self) -> str:
        """Plain-text listing, one constraint per line, round-trip exact floats."""
        names = self.variable_names

        def expr(coefs):
            return " + ".join(f"{float(v)!r}*{nm}" for v, nm in zip(coefs, names))

        lines = [f"maximize: {expr(self.objective)}"]
        for i in range(self.n_rows):
            lines.append(f"c{i}: {expr(self.a_ub[i])} <= {float(self.b_ub[i])!r}")
        for j, nm in enumerate(names):
            lines.append(f"bound: {float(self.lower[j])!r} <= {nm} <= {float(self.upper[j])!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dump(cls, text: str) -> "LpProblem":
        term = re.compile(r"^(\S+)\*(\S+)$")

        def parse_expr(s):
            names, vals = [], []
            for part in s.split(" + "):
                m = term.match(part.strip())
                if not m:
                    raise ValueError(f"bad term {part!r}")
                vals.append(float(m.group(1)))
                names.append(m.group(2))
            return names, vals

        names = c = None
        rows, rhs, bounds = [], [], {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            head, _, body = line.partition(": ")
            try:
                if head == "maximize":
                    names, c = parse_expr(body)
                elif head == "bound":
                    lo, nm, up = re.fullmatch(r"(\S+) <= (\S+) <= (\S+)", body).groups()
                    bounds[nm] = (float(lo), float(up))
                elif re.fullmatch(r"c\d+", head):
                    lhs, b = body.rsplit(" <= ", 1)
                    row_names, vals = parse_expr(lhs)
                    if row_names != names:
                        raise ValueError("variable order differs from objective")
                    rows.append(vals)
                    rhs.append(float(b))
                else:
                    raise ValueError(f"unknown line kind {head!r}")
            except (ValueError, AttributeError) as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        if names is None:
            raise ValueError("missing objective line")
        lo = [bounds[nm][0] for nm in names]
        up = [bounds[nm][1] for nm in names]
        return cls(np.array(c), np.array(rows).reshape(-1, len(names)), np.array(rhs),
                   np.array(lo), np.array(up), tuple(names))


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str
    x: Optional[np.ndarray]
    objective_value: float
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _pivot(t: np.ndarray, basis: list, row: int, col: int) -> None:
    t[row] /= t[row, col]
    col_vals = t[:, col].copy()
    col_vals[row] = 0.0
    t -= np.outer(col_vals, t[row])
    basis[row] = col


def _run_simplex(t: np.ndarray, basis: list, n_cols: int, max_iter: int) -> tuple[str, int]:
    """Maximize with reduced costs in the last row of ``t`` (optimal when all >= 0).

    Only the first ``n_cols`` columns may enter the basis.
    """
    m = t.shape[0] - 1
    for it in range(max_iter):
        red = t[-1, :n_cols]
        candidates = np.flatnonzero(red < -PIVOT_TOL)
        if candidates.size == 0:
            return OPTIMAL, it
        col = int(candidates[0])
        column = t[:m, col]
        pos = np.flatnonzero(column > PIVOT_TOL)
        if pos.size == 0:
            return UNBOUNDED, it
        ratios = t[pos, -1] / column[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(min(ties, key=lambda i: basis[i]))
        _pivot(t, basis, row, col)
    raise RuntimeError("simplex iteration limit reached")


def solve_lp(lp: LpProblem, max_iter: int = 50_000) -> LpSolution:
    n = lp.n_vars
    lo, up = lp.lower, lp.upper
    if not np.all(np.isfinite(lo)):
        raise ValueError("lower bounds must be finite")

    # shift x = lo + y with y >= 0; finite upper bounds become rows
    finite_up = np.flatnonzero(np.isfinite(up))
    a_std = np.vstack([lp.a_ub, np.eye(n)[finite_up]])
    b_std = np.concatenate([lp.b_ub - lp.a_ub @ lo, (up - lo)[finite_up]])
    m = a_std.shape[0]

    neg = b_std < 0
    art_rows = np.flatnonzero(neg)
    n_art = art_rows.size
    n_cols = n + m + n_art
    t = np.zeros((m + 1, n_cols + 1))
    sign = np.where(neg, -1.0, 1.0)
    t[:m, :n] = a_std * sign[:, None]
    t[:m, n:n + m] = np.diag(sign)
    t[:m, -1] = b_std * sign
    basis = [n + i for i in range(m)]
    for k, i in enumerate(art_rows):
        t[i, n + m + k] = 1.0
        basis[i] = n + m + k

    iters = 0
    if n_art:
        # phase 1: maximize -sum(artificials)
        t[-1, n + m:n_cols] = 1.0
        for i in art_rows:
            t[-1] -= t[i]
        status, it = _run_simplex(t, basis, n_cols, max_iter)
        iters += it
        if -t[-1, -1] > FEAS_TOL * max(1.0, np.abs(b_std).max()):
            return LpSolution(INFEASIBLE, None, float("nan"), iters)
        # drive zero-valued artificials out of the basis; drop redundant rows
        keep = []
        for i in range(m):
            if basis[i] >= n + m:
                cand = np.flatnonzero(np.abs(t[i, :n + m]) > 1e-9)
                if cand.size:
                    _pivot(t, basis, i, int(cand[0]))
                    keep.append(i)
            else:
                keep.append(i)
        rows = keep + [m]
        t = t[rows][:, list(range(n + m)) + [n_cols]]
        basis = [basis[i] for i in keep]
        n_cols = n + m

    # phase 2
    c_full = np.zeros(n_cols)
    c_full[:n] = lp.objective
    t[-1, :] = 0.0
    t[-1, :n_cols] = -c_full
    for i, bcol in enumerate(basis):
        if c_full[bcol] != 0.0:
            t[-1] += c_full[bcol] * t[i]
    status, it = _run_simplex(t, basis, n_cols, max_iter)
    iters += it
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, None, float("inf"), iters)

    # recompute the basic solution from the untouched problem data
    full = np.hstack([a_std, np.eye(m)])
    bcols = np.array(basis)
    xb = np.linalg.lstsq(full[:, bcols], b_std, rcond=None)[0]
    z = np.zeros(n + m)
    z[bcols] = xb
    y = np.clip(z[:n], 0.0, None)
    x = np.clip(lo + y, lo, up)
    return LpSolution(OPTIMAL, x, float(lp.objective @ x), iters)


def max_violation(lp: LpProblem, x: Sequence[float]) -> float:
    """Largest constraint or bound violation of ``x`` (0 when feasible)."""
    x = np.asarray(x, float)
    rows = lp.a_ub @ x - lp.b_ub
    return float(max(0.0, rows.max(initial=0.0), (lp.lower - x).max(), (x - lp.upper).max()))
