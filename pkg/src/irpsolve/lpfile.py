"""Reader and writer for a small LP text dialect.

The emitted files use the common CPLEX-style sections
``Minimize / Subject To / Bounds / Generals / Binaries / End`` with fully
spelled-out coefficients, one constraint per line. The parser accepts
exactly this subset, which is enough to round-trip our own models and to
talk to external solver commands.

Solution files are plain text: one ``name value`` pair per line, an
optional ``=obj= value`` line for the objective, ``#`` comments ignored.
"""

from __future__ import annotations

import math
import re

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.()\[\]#]*")
_TOKEN = re.compile(r"\s*(<=|>=|=|[+-]|[A-Za-z_][A-Za-z0-9_.()\[\]#]*"
                    r"|[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?|inf)")


class LpSyntaxError(ValueError):
    pass


def _fmt(value: float) -> str:
    if value == math.inf:
        return "+inf"
    if value == -math.inf:
        return "-inf"
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def write_lp(model) -> str:
    """Serialize a model; ``parse_lp`` restores it exactly."""
    lines = [f"\\ {model.name or 'model'}", "Minimize"]
    terms = []
    for idx, name in enumerate(model.variable_names):
        coef = model.objective[idx]
        if coef:
            terms.append(_term(coef, name, first=not terms))
    lines.append(" obj: " + (" ".join(terms) if terms else "0 " + model.variable_names[0]))
    lines.append("Subject To")
    for cname, coeffs, sense, rhs in model.constraints:
        parts = []
        for idx, coef in coeffs:
            parts.append(_term(coef, model.variable_names[idx], first=not parts))
        body = " ".join(parts) if parts else "0 " + model.variable_names[0]
        op = {"<=": "<=", ">=": ">=", "=": "="}[sense]
        lines.append(f" {cname}: {body} {op} {_fmt(rhs)}")
    lines.append("Bounds")
    for idx, name in enumerate(model.variable_names):
        lo, hi = model.lower[idx], model.upper[idx]
        if lo == -math.inf and hi == math.inf:
            lines.append(f" {name} free")
        elif hi == math.inf:
            lines.append(f" {name} >= {_fmt(lo)}")
        else:
            lines.append(f" {_fmt(lo)} <= {name} <= {_fmt(hi)}")
    generals = [n for n, k in zip(model.variable_names, model.kinds) if k == "integer"]
    binaries = [n for n, k in zip(model.variable_names, model.kinds) if k == "binary"]
    if generals:
        lines.append("Generals")
        lines.extend(f" {n}" for n in generals)
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {n}" for n in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


def _term(coef: float, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = _fmt(abs(coef))
    return f"{sign} {mag} {name}".strip() if not first else f"{sign}{mag} {name}"


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise LpSyntaxError(f"cannot tokenize near {text[pos:pos+20]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def parse_lp(text: str):
    """Parse LP text written by :func:`write_lp` into a ``MilpModel``."""
    from .milp import MilpModel

    sections = {"minimize": "objective", "subject": "constraints",
                "bounds": "bounds", "generals": "generals",
                "binaries": "binaries", "end": "end"}
    current = None
    objective: list[tuple[str, float]] = []
    constraints: list[tuple[str, list[tuple[str, float]], str, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    generals: set[str] = set()
    binaries: set[str] = set()
    frees: set[str] = set()
    name = "model"

    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip() if not raw.lstrip().startswith("\\") else ""
        if raw.lstrip().startswith("\\"):
            comment = raw.lstrip()[1:].strip()
            if comment and name == "model":
                name = comment
            continue
        if not line:
            continue
        head = line.split()[0].lower().rstrip(":")
        if head in sections and (head != "subject" or line.lower().startswith("subject to")):
            current = sections[head]
            if current == "end":
                break
            continue
        if current == "objective":
            body = line.split(":", 1)[1] if ":" in line else line
            objective.extend(_parse_expr(body))
        elif current == "constraints":
            if ":" not in line:
                raise LpSyntaxError(f"constraint without a name: {line!r}")
            cname, body = line.split(":", 1)
            tokens = _tokenize(body)
            op_at = next((i for i, t in enumerate(tokens) if t in ("<=", ">=", "=")), None)
            if op_at is None or op_at == len(tokens) - 1:
                raise LpSyntaxError(f"constraint missing comparison: {line!r}")
            terms = _parse_tokens(tokens[:op_at])
            rhs = _parse_number(tokens[op_at + 1:])
            constraints.append((cname.strip(), terms, tokens[op_at], rhs))
        elif current == "bounds":
            tokens = _tokenize(line)
            ops = [i for i, t in enumerate(tokens) if t == "<="]
            if len(tokens) == 2 and tokens[1].lower() == "free":
                frees.add(tokens[0])
            elif len(tokens) >= 3 and tokens[1] == ">=":
                bounds[tokens[0]] = (_parse_number(tokens[2:]), math.inf)
            elif len(ops) == 2 and ops[1] == ops[0] + 2:
                lo = _parse_number(tokens[:ops[0]])
                var = tokens[ops[0] + 1]
                hi = _parse_number(tokens[ops[1] + 1:])
                bounds[var] = (lo, hi)
            else:
                raise LpSyntaxError(f"unsupported bounds line: {line!r}")
        elif current == "generals":
            generals.update(_tokenize(line))
        elif current == "binaries":
            binaries.update(_tokenize(line))
        elif current is None:
            raise LpSyntaxError(f"content before any section: {line!r}")

    variables: list[str] = []
    seen = set()
    for source in ([n for n, _ in objective],
                   [n for _, terms, _, _ in constraints for n, _ in terms],
                   bounds.keys(), generals, binaries, frees):
        for n in source:
            if n not in seen:
                seen.add(n)
                variables.append(n)

    model = MilpModel(name=name)
    obj_map: dict[str, float] = {}
    for n, coef in objective:
        obj_map[n] = obj_map.get(n, 0.0) + coef
    for n in variables:
        if n in frees:
            lo, hi = -math.inf, math.inf
        else:
            lo, hi = bounds.get(n, (0.0, math.inf))
        kind = "binary" if n in binaries else ("integer" if n in generals else "continuous")
        model.add_variable(n, lower=lo, upper=hi, kind=kind,
                           objective=obj_map.get(n, 0.0))
    for cname, terms, sense, rhs in constraints:
        merged: dict[str, float] = {}
        for n, coef in terms:
            merged[n] = merged.get(n, 0.0) + coef
        model.add_constraint(cname, merged, sense, rhs)
    return model


def _parse_expr(body: str) -> list[tuple[str, float]]:
    return _parse_tokens(_tokenize(body))


def _parse_tokens(tokens: list[str]) -> list[tuple[str, float]]:
    terms = []
    sign = 1.0
    coef: float | None = None
    for tok in tokens:
        if tok == "+":
            continue
        if tok == "-":
            sign = -sign
        elif _NAME.fullmatch(tok) and tok.lower() != "inf":
            terms.append((tok, sign * (1.0 if coef is None else coef)))
            sign, coef = 1.0, None
        else:
            coef = math.inf if tok.lower() == "inf" else float(tok)
    if coef is not None:
        raise LpSyntaxError("dangling coefficient in expression")
    return terms


def _parse_number(tokens: list[str]) -> float:
    sign = 1.0
    for tok in tokens:
        if tok == "-":
            sign = -sign
        elif tok == "+":
            continue
        else:
            value = math.inf if tok.lower() == "inf" else float(tok)
            return sign * value
    raise LpSyntaxError("expected a number")


# ---------------------------------------------------------------------------
# Solution files


def write_solution(assignment: dict[str, float], objective: float | None = None,
                   bound: float | None = None) -> str:
    lines = []
    if objective is not None:
        lines.append(f"=obj= {_fmt(objective)}")
    if bound is not None:
        lines.append(f"=bound= {_fmt(bound)}")
    for name, value in assignment.items():
        lines.append(f"{name} {_fmt(value)}")
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> tuple[dict[str, float], float | None, float | None]:
    """Returns (assignment, objective or None, bound or None)."""
    assignment: dict[str, float] = {}
    objective = None
    bound = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "=obj=":
            objective = float(parts[1])
        elif parts[0] == "=bound=":
            bound = float(parts[1])
        elif len(parts) == 2:
            try:
                assignment[parts[0]] = float(parts[1])
            except ValueError:
                raise LpSyntaxError(f"line {lineno}: bad value {parts[1]!r}") from None
        else:
            raise LpSyntaxError(f"line {lineno}: expected 'name value'")
    return assignment, objective, bound
