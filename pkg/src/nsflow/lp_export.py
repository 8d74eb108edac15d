"""CPLEX-style LP export of the mixed-integer model, plus a small reader.

Variable naming is part of the public contract:

* ``f_<u>_<v>_<dim>``: continuous flow of edge (u, v) in dimension ``dim``
* ``b_<u>_<v>``: binary activation of edge (u, v)

with node ids reduced to ``[A-Za-z0-9_]`` (any other character becomes
``_``).  Constraint families appear in the order capacity, flow
conservation, node count, total count, non-negativity, each under a comment
header.  Infinite-capacity edges are bounded by ``f <= M b`` with ``M`` the
largest finite capacity entry of the network.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .flowcore import Finite, FlowNetwork, Solution, StructuralError, objective

TERMS_PER_LINE = 6
HEADERS = ("capacity", "flow cons.", "node count", "total count", "non-neg.")


def sanitize(node: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", node)


def flow_var(u: str, v: str, dim: int) -> str:
    return f"f_{sanitize(u)}_{sanitize(v)}_{dim}"


def act_var(u: str, v: str) -> str:
    return f"b_{sanitize(u)}_{sanitize(v)}"


def big_M(net: FlowNetwork) -> float:
    """Largest finite capacity entry; no flow component can exceed it anywhere."""
    entries = [x for c in net.capacities.values() if isinstance(c, Finite) for x in c.values]
    if not entries:
        raise StructuralError("network has no finite capacity; the model is unbounded")
    return max(entries)


def _num(x: float) -> str:
    x = float(x)
    return repr(0.0 if x == 0 else x)


def _expr(terms: list[tuple[float, str]]) -> list[str]:
    """Render ``coef var`` terms, wrapped over several lines."""
    parts = []
    for i, (coef, var) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1 else f"{_num(mag)} {var}"
        parts.append(body if i == 0 and sign == "+" else f"{sign} {body}")
    lines = []
    for i in range(0, len(parts), TERMS_PER_LINE):
        lines.append(" ".join(parts[i:i + TERMS_PER_LINE]))
    return lines


def _labeled(name: str, terms) -> list[str]:
    body = _expr(terms)
    body[0] = f" {name}: {body[0]}"
    for i in range(1, len(body)):
        body[i] = "   " + body[i]
    return body


def _row(name: str, terms, sense: str, rhs: float) -> list[str]:
    body = _labeled(name, terms)
    body[-1] += f" {sense} {_num(rhs) if rhs != int(rhs) else int(rhs)}"
    return body


def export_lp(net: FlowNetwork) -> str:
    """LP-format text of the model for ``net``; byte-identical for equal input."""
    s, t, k = net.source, net.sink, net.k
    if not net.succ(s):
        raise StructuralError("source has no outgoing edge; the model is infeasible")
    names = {}
    for u, v in net.edges:
        name = act_var(u, v)
        if name in names:
            raise StructuralError(f"edges {names[name]} and {(u, v)} collide as {name}")
        names[name] = (u, v)
    M = big_M(net)
    inner = net.intermediate

    out = [f"\\ non-separable multi-dimensional max flow: k={k} d={net.d} "
           f"nodes={len(net.nodes)} edges={len(net.edges)} M={_num(M)}",
           "Maximize"]
    obj = [(1.0, flow_var(s, v, i)) for v in net.succ(s) for i in range(k)]
    out += _labeled("obj", obj)
    out.append("Subject To")

    out.append(f"\\ ({HEADERS[0]})")
    for u, v in net.edges:
        cap = net.capacity(u, v)
        for i in range(k):
            f, b = flow_var(u, v, i), act_var(u, v)
            if isinstance(cap, Finite):
                c = cap.values[i]
                terms = [(1.0, f)] + ([(-c, b)] if c != 0 else [])
                out += _row(f"cap_{sanitize(u)}_{sanitize(v)}_{i}", terms, "<=", 0)
            else:
                out += _row(f"bigm_{sanitize(u)}_{sanitize(v)}_{i}", [(1.0, f), (-M, b)], "<=", 0)

    out.append(f"\\ ({HEADERS[1]})")
    for v in inner:
        for i in range(k):
            terms = [(1.0, flow_var(u, v, i)) for u in net.pred(v)]
            terms += [(-1.0, flow_var(v, w, i)) for w in net.succ(v)]
            if terms:
                out += _row(f"cons_{sanitize(v)}_{i}", terms, "=", 0)

    out.append(f"\\ ({HEADERS[2]})")
    for v in inner:
        ins = [(1.0, act_var(u, v)) for u in net.pred(v)]
        outs = [(1.0, act_var(v, w)) for w in net.succ(v)]
        if not ins or not outs:
            raise StructuralError(f"node {v} cannot satisfy the node count constraint")
        out += _row(f"nin_{sanitize(v)}", ins, "=", 1)
        out += _row(f"nout_{sanitize(v)}", outs, "=", 1)

    out.append(f"\\ ({HEADERS[3]})")
    out += _row("total_src", [(1.0, act_var(s, v)) for v in net.succ(s)], "=", net.d)
    snk = [(1.0, act_var(u, t)) for u in net.pred(t)]
    if not snk:
        raise StructuralError("sink has no incoming edge; the model is infeasible")
    out += _row("total_snk", snk, "=", net.d)

    out.append("Bounds")
    out.append(f"\\ ({HEADERS[4]})")
    for u, v in net.edges:
        for i in range(k):
            out.append(f" {flow_var(u, v, i)} >= 0")
    out.append("Binary")
    for u, v in net.edges:
        out.append(f" {act_var(u, v)}")
    out.append("End")
    return "\n".join(out) + "\n"


# --- reading ----------------------------------------------------------------

@dataclass
class LpModel:
    sense: str
    objective: dict[str, float]
    constraints: list[tuple[str, dict[str, float], str, float]]
    lower: dict[str, float] = field(default_factory=dict)
    binaries: list[str] = field(default_factory=list)

    @property
    def variables(self) -> list[str]:
        seen = dict.fromkeys(self.objective)
        for _, terms, _, _ in self.constraints:
            seen.update(dict.fromkeys(terms))
        seen.update(dict.fromkeys(self.lower))
        seen.update(dict.fromkeys(self.binaries))
        return list(seen)

    def violations(self, values: dict[str, float], tol: float = 1e-9) -> list[str]:
        """Names of rows, bounds or integrality conditions broken by ``values``."""
        bad = []
        for name, terms, sense, rhs in self.constraints:
            lhs = sum(c * values.get(v, 0.0) for v, c in terms.items())
            if (sense == "<=" and lhs > rhs + tol) or (sense == ">=" and lhs < rhs - tol) \
                    or (sense == "=" and abs(lhs - rhs) > tol):
                bad.append(name)
        for var, lb in self.lower.items():
            if values.get(var, 0.0) < lb - tol:
                bad.append(f"bound:{var}")
        for var in self.binaries:
            x = values.get(var, 0.0)
            if min(abs(x), abs(x - 1)) > tol:
                bad.append(f"binary:{var}")
        return bad


_SENSES = {"<=": "<=", "=<": "<=", ">=": ">=", "=>": ">=", "=": "="}
_SECTION = re.compile(r"^\s*(maximize|maximum|max|minimize|minimum|min|subject to|such that|st|s\.t\.|"
                      r"bounds|binary|binaries|bin|generals|general|end)\s*$", re.I)


def _terms(tokens: list[str]) -> dict[str, float]:
    terms: dict[str, float] = {}
    sign, coef = 1.0, None
    for tok in tokens:
        if tok in "+-":
            sign = -1.0 if tok == "-" else 1.0
            continue
        try:
            coef = float(tok)
            continue
        except ValueError:
            pass
        terms[tok] = terms.get(tok, 0.0) + sign * (1.0 if coef is None else coef)
        sign, coef = 1.0, None
    return terms


def parse_lp(text: str) -> LpModel:
    """Read the subset of LP format that :func:`export_lp` writes."""
    sections: dict[str, list[str]] = {}
    current = None
    sense = "max"
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _SECTION.match(line)
        if m:
            word = m.group(1).lower()
            if word.startswith("max"):
                current, sense = "obj", "max"
            elif word.startswith("min"):
                current, sense = "obj", "min"
            elif word in ("subject to", "such that", "st", "s.t."):
                current = "rows"
            elif word == "bounds":
                current = "bounds"
            elif word.startswith("bin"):
                current = "binary"
            elif word.startswith("gen"):
                current = "general"
            else:
                current = None
            continue
        if current is None:
            raise ValueError(f"content outside any section: {raw!r}")
        sections.setdefault(current, []).append(line)

    obj_tokens = " ".join(sections.get("obj", [])).split()
    if obj_tokens and obj_tokens[0].endswith(":"):
        obj_tokens = obj_tokens[1:]
    model = LpModel(sense, _terms(obj_tokens), [])

    rows_text = " ".join(sections.get("rows", []))
    for name, body in re.findall(r"(\S+):\s*(.*?)(?=\s\S+:|$)", rows_text):
        toks = body.split()
        idx = next(i for i, tok in enumerate(toks) if tok in _SENSES)
        model.constraints.append((name, _terms(toks[:idx]), _SENSES[toks[idx]], float(toks[idx + 1])))

    for line in sections.get("bounds", []):
        toks = line.split()
        if len(toks) == 3 and toks[1] in (">=", "=>"):
            model.lower[toks[0]] = float(toks[2])
    for line in sections.get("binary", []):
        model.binaries.extend(line.split())
    return model


def read_solution(text: str) -> dict[str, float]:
    """Parse a plain ``name value`` listing; blank lines and ``#`` comments skipped."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace("=", " ").split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'name value', got {raw!r}")
        try:
            values[parts[0]] = float(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: bad value {parts[1]!r}") from None
    return values


def solution_values(net: FlowNetwork, sol: Solution) -> dict[str, float]:
    """Variable assignment of the exported model that corresponds to ``sol``."""
    values = {}
    for u, v in net.edges:
        for i, x in enumerate(np.asarray(sol.flows[(u, v)], dtype=float)):
            values[flow_var(u, v, i)] = float(x)
        values[act_var(u, v)] = 1.0 if sol.active[(u, v)] else 0.0
    return values


def solution_from_values(net: FlowNetwork, values: dict[str, float]) -> Solution:
    """Map an assignment of the exported model back to a :class:`Solution`."""
    flows, active = {}, {}
    for u, v in net.edges:
        flows[(u, v)] = np.array([values.get(flow_var(u, v, i), 0.0) for i in range(net.k)])
        active[(u, v)] = values.get(act_var(u, v), 0.0) > 0.5
    sol = Solution(MappingProxyType(flows), MappingProxyType(active), 0.0, net.source)
    return Solution(sol.flows, sol.active, objective(sol), net.source)


def solve_with_highs(text: str) -> tuple[float, dict[str, float]] | None:
    """Solve an LP-format model with SciPy's HiGHS MILP interface.

    Returns ``(objective, values)`` or ``None`` if HiGHS reports infeasibility.
    """
    from scipy.optimize import Bounds, LinearConstraint, milp

    model = parse_lp(text)
    names = model.variables
    col = {v: i for i, v in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for v, coef in model.objective.items():
        c[col[v]] = coef
    if model.sense == "max":
        c = -c
    A = np.zeros((len(model.constraints), n))
    lo = np.full(len(model.constraints), -np.inf)
    hi = np.full(len(model.constraints), np.inf)
    for r, (_, terms, sense, rhs) in enumerate(model.constraints):
        for v, coef in terms.items():
            A[r, col[v]] = coef
        if sense in ("<=", "="):
            hi[r] = rhs
        if sense in (">=", "="):
            lo[r] = rhs
    lb = np.array([model.lower.get(v, 0.0) for v in names])
    ub = np.full(n, np.inf)
    integrality = np.zeros(n)
    for v in model.binaries:
        integrality[col[v]] = 1
        ub[col[v]] = 1.0
    res = milp(c, constraints=LinearConstraint(A, lo, hi), integrality=integrality,
               bounds=Bounds(lb, ub))
    if res.x is None:
        return None
    obj = -res.fun if model.sense == "max" else res.fun
    return float(obj), {v: float(res.x[col[v]]) for v in names}
