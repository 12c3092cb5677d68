"""Benchmark MDPs, their feature maps and target policies, and a text format.

Environment file grammar (line oriented, ``#`` starts a comment)::

    mdp <n_states> <n_actions> <n_features>
    discount <gamma>
    start <state>
    terminals [<state> ...]
    names <feature name> ...            (optional)
    transitions
    <s> <a>: <s'> <p> [<s'> <p> ...]     (one line per non-terminal (s, a))
    features
    <s>: <F(s,0)> ... <F(s,k-1)>         (one line per state)
    policy: <a_0> ... <a_{n-1}>          (terminal entries are ignored)
    end

Nothing but comments and blank lines may follow ``end``. Terminal states take
no transition lines; they are stored as self-loops.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .mdp import Mdp, Policy, RewardVector, optimal_policy

UP, DOWN, LEFT, RIGHT = range(4)
CHAIN_LEFT, CHAIN_RIGHT = 0, 1

RN_ORIGINAL = (-0.04, 1.0, -1.0)
RN_REFERENCE_LP = (-0.0223, 0.6119, -1.0)


@dataclass(frozen=True)
class EnvironmentSpec:
    kind: str                    # rn_grid | chain | chain_subgoals | chain_dense
    n: int = 60
    spacing: int = 3
    constant: bool = True
    discount: float = 0.95
    intended: float = 0.8

    def build(self) -> tuple[Mdp, Policy]:
        if self.kind == "rn_grid":
            return russell_norvig_grid(self.discount, self.intended)
        if self.kind == "chain":
            return chain(self.n, "two_feature", discount=self.discount)
        if self.kind == "chain_subgoals":
            return chain(self.n, "subgoals", spacing=self.spacing, constant=self.constant,
                         discount=self.discount)
        if self.kind == "chain_dense":
            return chain(self.n, "dense", discount=self.discount)
        raise ValueError(f"unknown environment kind {self.kind!r}")


# ---------------------------------------------------------------------------
# Russell/Norvig 4x3 grid
# ---------------------------------------------------------------------------

GRID_COLS, GRID_ROWS = 4, 3
GRID_WALL = (2, 2)
GRID_START, GRID_GOAL, GRID_LAVA = (1, 1), (4, 3), (4, 2)
_MOVES = {UP: (0, 1), DOWN: (0, -1), LEFT: (-1, 0), RIGHT: (1, 0)}
_SLIPS = {UP: (LEFT, RIGHT), DOWN: (LEFT, RIGHT), LEFT: (UP, DOWN), RIGHT: (UP, DOWN)}


def grid_cells() -> list[tuple[int, int]]:
    """(column, row) of every open cell, 1-indexed, bottom row first."""
    return [(c, r) for r in range(1, GRID_ROWS + 1) for c in range(1, GRID_COLS + 1)
            if (c, r) != GRID_WALL]


def russell_norvig_grid(discount: float = 0.95, intended: float = 0.8) -> tuple[Mdp, Policy]:
    cells = grid_cells()
    index = {cell: i for i, cell in enumerate(cells)}
    n = len(cells)
    slip = (1.0 - intended) / 2.0

    def move(cell, a):
        dc, dr = _MOVES[a]
        nxt = (cell[0] + dc, cell[1] + dr)
        return index.get(nxt, index[cell])

    terminal = np.zeros(n, bool)
    terminal[[index[GRID_GOAL], index[GRID_LAVA]]] = True
    t = np.zeros((n, 4, n))
    for s, cell in enumerate(cells):
        if terminal[s]:
            t[s, :, s] = 1.0
            continue
        for a in range(4):
            t[s, a, move(cell, a)] += intended
            for o in _SLIPS[a]:
                t[s, a, move(cell, o)] += slip
    f = np.zeros((n, 3))
    f[~terminal, 0] = 1.0
    f[index[GRID_GOAL], 1] = 1.0
    f[index[GRID_LAVA], 2] = 1.0
    mdp = Mdp(t, terminal, index[GRID_START], f, discount, ("step", "goal", "lava"))
    pi, _ = optimal_policy(mdp, RewardVector(RN_ORIGINAL), discount)
    return mdp, pi


def render_grid_policy(pi: Policy) -> str:
    arrows = "^v<>"
    cells = grid_cells()
    index = {cell: i for i, cell in enumerate(cells)}
    lines = []
    for r in range(GRID_ROWS, 0, -1):
        row = []
        for c in range(1, GRID_COLS + 1):
            if (c, r) == GRID_WALL:
                row.append("#")
            elif (c, r) == GRID_GOAL:
                row.append("+")
            elif (c, r) == GRID_LAVA:
                row.append("-")
            else:
                row.append(arrows[pi[index[(c, r)]]])
        lines.append(" ".join(row))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------

def subgoal_states(n: int, spacing: int) -> list[int]:
    """0-based indices of states at 1-based positions ``spacing, 2*spacing, ... < n``."""
    if spacing < 1 or spacing >= n:
        raise ValueError(f"invalid subgoal spacing {spacing} for a {n}-state chain")
    return [j - 1 for j in range(spacing, n, spacing)]


def chain(n: int = 60, variant: str = "two_feature", spacing: int = 3,
          constant: bool = True, discount: float = 0.95) -> tuple[Mdp, Policy]:
    """Deterministic left/right chain; start at the left end, goal at the right.

    Feature layouts by ``variant``:

    * ``two_feature``: (goal, step)
    * ``subgoals``: (step, goal, subgoal) when ``constant`` else
      (step, goal, subgoal_1, ..., subgoal_m)
    * ``dense``: one indicator per state
    """
    if n < 2:
        raise ValueError("chain needs at least two states")
    t = np.zeros((n, 2, n))
    for s in range(n - 1):
        t[s, CHAIN_LEFT, max(s - 1, 0)] = 1.0
        t[s, CHAIN_RIGHT, s + 1] = 1.0
    t[n - 1, :, n - 1] = 1.0                  # terminal goal, stored as a self-loop
    terminal = np.zeros(n, bool)
    terminal[-1] = True
    goal = n - 1

    if variant == "two_feature":
        f = np.zeros((n, 2))
        f[goal, 0] = 1.0
        f[:goal, 1] = 1.0
        names = ("goal", "step")
    elif variant == "subgoals":
        subs = subgoal_states(n, spacing)
        width = 3 if constant else 2 + len(subs)
        f = np.zeros((n, width))
        f[goal, 1] = 1.0
        for j, s in enumerate(subs):
            f[s, 2 if constant else 2 + j] = 1.0
        f[:goal, 0] = 1.0
        f[subs, 0] = 0.0
        names = ("step", "goal") + (("subgoal",) if constant
                                    else tuple(f"subgoal{s + 1}" for s in subs))
    elif variant == "dense":
        f = np.eye(n)
        names = tuple(f"s{s + 1}" for s in range(n))
    else:
        raise ValueError(f"unknown chain variant {variant!r}")
    mdp = Mdp(t, terminal, 0, f, discount, names)
    return mdp, Policy(np.full(n, CHAIN_RIGHT))


# ---------------------------------------------------------------------------
# Named presets
# ---------------------------------------------------------------------------

ENVIRONMENTS = {
    "rn_grid": EnvironmentSpec("rn_grid"),
    "chain60": EnvironmentSpec("chain"),
    "chain60_subgoals_constant": EnvironmentSpec("chain_subgoals", constant=True),
    "chain60_subgoals": EnvironmentSpec("chain_subgoals", constant=False),
    "chain60_dense": EnvironmentSpec("chain_dense"),
}

REWARD_PRESETS = {
    "rn_grid": {"original": RN_ORIGINAL, "reference_lp": RN_REFERENCE_LP},
    "chain60": {"goal": (1.0, 0.0), "penalty": (0.0, -1.0), "combo": (1.0, -1.0)},
    "chain60_subgoals_constant": {"subgoal-constant": (-1.0, 1.0, -0.7)},
}


def get_environment(name: str) -> tuple[Mdp, Policy]:
    try:
        return ENVIRONMENTS[name].build()
    except KeyError:
        raise KeyError(f"unknown environment {name!r}; choose from {sorted(ENVIRONMENTS)}") from None


def get_reward_preset(env_name: str, reward_name: str) -> RewardVector:
    presets = REWARD_PRESETS.get(env_name, {})
    if reward_name not in presets:
        raise KeyError(f"no reward preset {reward_name!r} for {env_name!r}; "
                       f"available: {sorted(presets)}")
    return RewardVector(presets[reward_name])


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

class EnvironmentParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def dumps_environment(mdp: Mdp, pi: Policy) -> str:
    terms = " ".join(str(s) for s in np.flatnonzero(mdp.terminal))
    out = [f"mdp {mdp.n_states} {mdp.n_actions} {mdp.n_features}",
           f"discount {mdp.objective_discount!r}",
           f"start {mdp.start_state}",
           f"terminals {terms}".rstrip(),
           "names " + " ".join(mdp.feature_names),
           "transitions"]
    for s in mdp.nonterminal:
        for a in range(mdp.n_actions):
            succ = np.flatnonzero(mdp.transition[s, a])
            pairs = " ".join(f"{sp} {float(mdp.transition[s, a, sp])!r}" for sp in succ)
            out.append(f"{s} {a}: {pairs}")
    out.append("features")
    for s in range(mdp.n_states):
        out.append(f"{s}: " + " ".join(repr(float(v)) for v in mdp.features[s]))
    acts = np.where(mdp.terminal, 0, pi.actions)
    out.append("policy: " + " ".join(str(int(a)) for a in acts))
    out.append("end")
    return "\n".join(out) + "\n"


def save_environment(path: Union[str, Path], mdp: Mdp, pi: Policy) -> None:
    Path(path).write_text(dumps_environment(mdp, pi))


def _ints(tokens, lineno, what):
    try:
        return [int(tok) for tok in tokens]
    except ValueError:
        raise EnvironmentParseError(lineno, f"expected integers for {what}") from None


def _floats(tokens, lineno, what):
    try:
        return [float(tok) for tok in tokens]
    except ValueError:
        raise EnvironmentParseError(lineno, f"expected numbers for {what}") from None


def loads_environment(text: str) -> tuple[Mdp, Policy]:
    lines = [(i, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln]
    pos = 0

    def take(keyword):
        nonlocal pos
        if pos >= len(lines):
            raise EnvironmentParseError(lines[-1][0] if lines else 0, f"missing '{keyword}'")
        lineno, ln = lines[pos]
        head, *rest = ln.split()
        if head != keyword:
            raise EnvironmentParseError(lineno, f"expected '{keyword}', found {head!r}")
        pos += 1
        return lineno, rest

    lineno, rest = take("mdp")
    if len(rest) != 3:
        raise EnvironmentParseError(lineno, "mdp header needs n_states n_actions n_features")
    n, n_act, k = _ints(rest, lineno, "mdp header")
    if min(n, n_act, k) < 1:
        raise EnvironmentParseError(lineno, "sizes must be positive")
    lineno, rest = take("discount")
    if len(rest) != 1:
        raise EnvironmentParseError(lineno, "discount takes one value")
    (gamma,) = _floats(rest, lineno, "discount")
    lineno, rest = take("start")
    if len(rest) != 1:
        raise EnvironmentParseError(lineno, "start takes one state")
    (start,) = _ints(rest, lineno, "start")
    if not 0 <= start < n:
        raise EnvironmentParseError(lineno, f"start state {start} out of range")
    lineno, rest = take("terminals")
    terminals = _ints(rest, lineno, "terminals")
    for s in terminals:
        if not 0 <= s < n:
            raise EnvironmentParseError(lineno, f"terminal state {s} out of range")
    names = ()
    if pos < len(lines) and lines[pos][1].split()[0] == "names":
        lineno, rest = take("names")
        if len(rest) != k:
            raise EnvironmentParseError(lineno, f"expected {k} feature names")
        names = tuple(rest)
    take("transitions")

    terminal = np.zeros(n, bool)
    terminal[terminals] = True
    t = np.zeros((n, n_act, n))
    for s in terminals:
        t[s, :, s] = 1.0
    seen = set()
    while pos < len(lines) and lines[pos][1] != "features":
        lineno, ln = lines[pos]
        pos += 1
        head, sep, body = ln.partition(":")
        if not sep:
            raise EnvironmentParseError(lineno, "transition line needs 's a: ...'")
        sa = _ints(head.split(), lineno, "transition (s, a)")
        if len(sa) != 2:
            raise EnvironmentParseError(lineno, "transition line needs exactly 's a'")
        s, a = sa
        if not (0 <= s < n and 0 <= a < n_act):
            raise EnvironmentParseError(lineno, f"(s={s}, a={a}) out of range")
        if terminal[s]:
            raise EnvironmentParseError(lineno, f"state {s} is terminal and takes no transitions")
        if (s, a) in seen:
            raise EnvironmentParseError(lineno, f"duplicate transition row (s={s}, a={a})")
        seen.add((s, a))
        toks = body.split()
        if not toks or len(toks) % 2:
            raise EnvironmentParseError(lineno, "transition row needs successor/probability pairs")
        succ = _ints(toks[0::2], lineno, "successor states")
        probs = _floats(toks[1::2], lineno, "probabilities")
        for sp, p in zip(succ, probs):
            if not 0 <= sp < n:
                raise EnvironmentParseError(lineno, f"dangling successor state {sp}")
            if p < 0:
                raise EnvironmentParseError(lineno, f"negative probability {p}")
            t[s, a, sp] += p
        total = t[s, a].sum()
        if abs(total - 1.0) > 1e-12:
            raise EnvironmentParseError(
                lineno, f"transition row (s={s}, a={a}) sums to {total!r}, not 1")
    missing = [(s, a) for s in range(n) if not terminal[s] for a in range(n_act)
               if (s, a) not in seen]
    if missing:
        at = lines[pos][0] if pos < len(lines) else lines[-1][0]
        raise EnvironmentParseError(at, f"missing transition row (s={missing[0][0]}, a={missing[0][1]})")
    take("features")

    f = np.full((n, k), np.nan)
    while pos < len(lines) and not lines[pos][1].startswith("policy"):
        lineno, ln = lines[pos]
        pos += 1
        head, sep, body = ln.partition(":")
        if not sep:
            raise EnvironmentParseError(lineno, "feature line needs 's: values'")
        (s,) = _ints([head.strip()], lineno, "feature state")
        if not 0 <= s < n:
            raise EnvironmentParseError(lineno, f"feature state {s} out of range")
        vals = _floats(body.split(), lineno, "features")
        if len(vals) != k:
            raise EnvironmentParseError(lineno, f"expected {k} feature values, got {len(vals)}")
        f[s] = vals
    if np.isnan(f).any():
        s = int(np.flatnonzero(np.isnan(f).any(axis=1))[0])
        raise EnvironmentParseError(lines[pos - 1][0], f"missing feature row for state {s}")

    if pos >= len(lines):
        raise EnvironmentParseError(lines[-1][0], "missing 'policy:' line")
    lineno, ln = lines[pos]
    pos += 1
    head, _, body = ln.partition(":")
    if head.strip() != "policy":
        raise EnvironmentParseError(lineno, "expected 'policy:'")
    acts = _ints(body.split(), lineno, "policy")
    if len(acts) != n:
        raise EnvironmentParseError(lineno, f"policy needs {n} entries, got {len(acts)}")
    for s, a in enumerate(acts):
        if not terminal[s] and not 0 <= a < n_act:
            raise EnvironmentParseError(lineno, f"policy action {a} at state {s} out of range")
    lineno, _ = take("end")
    if pos != len(lines):
        raise EnvironmentParseError(lines[pos][0], "trailing content after 'end'")
    try:
        mdp = Mdp(t, terminal, start, f, gamma, names)
    except ValueError as exc:
        raise EnvironmentParseError(1, str(exc)) from None
    return mdp, Policy(acts)


def load_environment(path: Union[str, Path]) -> tuple[Mdp, Policy]:
    return loads_environment(Path(path).read_text())
