"""TOML surface specifications and the rational-expression grammar.

A specification looks like::

    label = "catenoid-cousin"
    G = "z"
    g = "z^mu"
    Q = "((1-mu^2)/4)/z^2 dz2"
    ends = ["0", "inf"]

    [parameters]
    mu = 2

Expressions use numbers (``2``, ``0.5``, ``1.5i``, ``i``), the variable ``z``,
named parameters, ``+ - * / ^`` and parentheses.  Exponents are constants;
a non-integer exponent is only accepted on ``z`` itself (a principal-branch
power).  ``Q`` ends with the token ``dz2``.
"""
from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass, field, replace
from numbers import Number

from .cmc import SurfaceData, hopf_from_maps
from .errors import ParseError, UnknownParameter
from .series import INF, PowerForm, RationalFunction

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


_TOKEN = re.compile(r"""
    (?P<space>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

_WEIGHT_TOKENS = {"dz": 1, "dz2": 2}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", column=pos + 1)
        if m.lastgroup != "space":
            tokens.append(Token(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    tokens.append(Token("end", "", len(text) + 1))
    return tokens


def _is_const(v) -> bool:
    return isinstance(v, Number)


def _is_z(v) -> bool:
    return (isinstance(v, RationalFunction) and v.factors and len(v.factors) == 1
            and v.factors[0] == (0j, 1) and v.const_factor == 1)


class _Parser:
    """Recursive descent over ``expr := term (('+'|'-') term)*`` and friends."""

    def __init__(self, text: str, parameters: dict):
        self.tokens = tokenize(text)
        self.i = 0
        self.parameters = parameters

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _expect(self, text: str) -> None:
        if self.tok.text != text:
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}",
                             column=self.tok.column)
        self._advance()

    def parse(self):
        if self.tok.kind == "end":
            raise ParseError("empty expression", column=1)
        value = self.expr()
        weight = 0
        if self.tok.kind == "name" and self.tok.text in _WEIGHT_TOKENS:
            weight = _WEIGHT_TOKENS[self._advance().text]
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", column=self.tok.column)
        return value, weight

    def expr(self):
        value = self.term()
        while self.tok.text in ("+", "-"):
            op = self._advance()
            rhs = self.term()
            value = self._apply(op, value, rhs)
        return value

    def term(self):
        value = self.unary()
        while self.tok.text in ("*", "/"):
            op = self._advance()
            rhs = self.unary()
            value = self._apply(op, value, rhs)
        return value

    def unary(self):
        if self.tok.text == "-":
            self._advance()
            return -self.unary()
        if self.tok.text == "+":
            self._advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.text != "^":
            return base
        op = self._advance()
        exponent = self.unary()
        if not _is_const(exponent):
            raise ParseError("exponents must be constants", column=op.column)
        return self._power(base, complex(exponent), op.column)

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self._advance()
            if t.text.endswith("i"):
                return complex(0, float(t.text[:-1]))
            return float(t.text) if any(c in t.text for c in ".eE") else int(t.text)
        if t.kind == "name":
            if t.text in _WEIGHT_TOKENS:
                raise ParseError(f"{t.text!r} must end the expression", column=t.column)
            self._advance()
            if t.text == "z":
                return RationalFunction.z()
            if t.text in self.parameters:
                return self.parameters[t.text]
            if t.text == "i":
                return 1j
            raise UnknownParameter(f"unknown parameter {t.text!r}", column=t.column)
        if t.text == "(":
            self._advance()
            value = self.expr()
            self._expect(")")
            return value
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", column=t.column)

    def _apply(self, op: Token, a, b):
        try:
            if op.text == "+":
                return a + b
            if op.text == "-":
                return a - b
            if op.text == "*":
                return a * b
            return a / b
        except ZeroDivisionError as exc:
            raise ParseError("division by zero", column=op.column) from exc

    def _power(self, base, exponent: complex, column: int):
        integer = exponent.imag == 0 and float(exponent.real).is_integer()
        if _is_const(base):
            return base ** (int(exponent.real) if integer else exponent)
        if integer:
            n = int(exponent.real)
            try:
                return base ** n if n >= 0 else 1 / base ** (-n)
            except ZeroDivisionError as exc:
                raise ParseError("negative power of zero", column=column) from exc
        if exponent.imag == 0 and _is_z(base):
            return PowerForm.monomial(1, exponent.real)
        raise ParseError("non-integer powers are only allowed on z", column=column)


def parse_expression(text: str, parameters: dict | None = None):
    """Parse to ``(value, weight)``; value is a number, RationalFunction or PowerForm."""
    return _Parser(text, parameters or {}).parse()


def _as_function(value, weight: int):
    if _is_const(value):
        value = RationalFunction.const(value)
    return value.with_weight(weight)


def parse_point(text):
    """An end: ``inf`` or a complex constant expression."""
    if isinstance(text, Number):
        return complex(text)
    if text.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    value, weight = parse_expression(text)
    if weight or not _is_const(value):
        raise ParseError(f"end {text!r} is not a constant")
    return complex(value)


@dataclass(frozen=True)
class SurfaceSpecFile:
    label: str
    G: str
    ends: tuple
    g: str | None = None
    Q: str | None = None
    parameters: dict = field(default_factory=dict)

    def with_parameters(self, updates: dict) -> "SurfaceSpecFile":
        for name in updates:
            if name not in self.parameters:
                raise UnknownParameter(f"{self.label} has no parameter {name!r}")
        return replace(self, parameters={**self.parameters, **updates})


_KEYS = {"label", "G", "g", "Q", "ends", "parameters"}


def _key_line(text: str, key: str):
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*=", re.MULTILINE)
    m = pattern.search(text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _parameter_value(name: str, value):
    if isinstance(value, bool) or not isinstance(value, (Number, str)):
        raise ParseError(f"parameter {name!r} must be a number")
    if isinstance(value, str):
        v, weight = parse_expression(value)
        if weight or not _is_const(v):
            raise ParseError(f"parameter {name!r} must be a constant")
        return v
    return value


def parse_spec(text: str) -> SurfaceSpecFile:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ParseError(f"invalid TOML: {exc}", line=line, column=col) from exc
    unknown = set(doc) - _KEYS
    if unknown:
        name = sorted(unknown)[0]
        raise ParseError(f"unknown key {name!r}", line=_key_line(text, name))
    for key in ("G", "ends"):
        if key not in doc:
            raise ParseError(f"missing required key {key!r}")
    if "Q" not in doc and "g" not in doc:
        raise ParseError("either Q or g must be given")
    params = doc.get("parameters", {})
    if not isinstance(params, dict):
        raise ParseError("parameters must be a table", line=_key_line(text, "parameters"))
    params = {k: _parameter_value(k, v) for k, v in params.items()}
    for key in ("label", "G", "g", "Q"):
        if key in doc and not isinstance(doc[key], str):
            raise ParseError(f"{key} must be a string", line=_key_line(text, key))
    ends = doc["ends"]
    if not isinstance(ends, list) or not ends:
        raise ParseError("ends must be a non-empty list", line=_key_line(text, "ends"))
    spec = SurfaceSpecFile(label=doc.get("label", ""), G=doc["G"], g=doc.get("g"), Q=doc.get("Q"),
                           ends=tuple(str(e) if not isinstance(e, str) else e for e in ends),
                           parameters=params)
    _check_expressions(spec, text)
    return spec


def _check_expressions(spec: SurfaceSpecFile, text: str = "") -> None:
    for key in ("G", "g", "Q"):
        src = getattr(spec, key)
        if src is None:
            continue
        try:
            _, weight = parse_expression(src, spec.parameters)
        except ParseError as exc:
            raise type(exc)(f"{key}: {exc.message}", line=_key_line(text, key),
                            column=exc.column) from exc
        expected = 2 if key == "Q" else 0
        if weight != expected:
            suffix = "must end with dz2" if key == "Q" else "takes no dz suffix"
            raise ParseError(f"{key} {suffix}", line=_key_line(text, key))
    for e in spec.ends:
        try:
            parse_point(e)
        except ParseError as exc:
            raise ParseError(f"ends: {exc.message}", line=_key_line(text, "ends")) from exc


def _toml_value(v) -> str:
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, complex):
        return json.dumps(f"{v.real!r}+{v.imag!r}i")
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return repr(v)


def serialize(spec: SurfaceSpecFile) -> str:
    lines = [f"label = {_toml_value(spec.label)}", f"G = {_toml_value(spec.G)}"]
    if spec.g is not None:
        lines.append(f"g = {_toml_value(spec.g)}")
    if spec.Q is not None:
        lines.append(f"Q = {_toml_value(spec.Q)}")
    lines.append(f"ends = {_toml_value(list(spec.ends))}")
    if spec.parameters:
        lines += ["", "[parameters]"]
        lines += [f"{k} = {_toml_value(v)}" for k, v in spec.parameters.items()]
    return "\n".join(lines) + "\n"


def build_surface(spec: SurfaceSpecFile) -> SurfaceData:
    """Turn a specification into SurfaceData; Q defaults to ``(S(g) - S(G))/2``."""
    G, _ = parse_expression(spec.G, spec.parameters)
    if isinstance(G, PowerForm):
        raise ParseError("G must be a rational function of z")
    G = _as_function(G, 0)
    g = None
    if spec.g is not None:
        value, _ = parse_expression(spec.g, spec.parameters)
        g = _as_function(value, 0)
    if spec.Q is not None:
        value, _ = parse_expression(spec.Q, spec.parameters)
        if isinstance(value, PowerForm):
            raise ParseError("Q must be a rational 2-differential")
        Q = _as_function(value, 2)
    else:
        Q = hopf_from_maps(g, G)
    ends = tuple(parse_point(e) for e in spec.ends)
    return SurfaceData(G, Q, ends, g=g, label=spec.label)


def builtin_examples() -> list[SurfaceSpecFile]:
    return [
        SurfaceSpecFile(
            label="catenoid-cousin", G="z", g="z^mu", Q="((1-mu^2)/4)/z^2 dz2",
            ends=("0", "inf"), parameters={"mu": 2}),
        SurfaceSpecFile(
            label="perturbed-catenoid-cousin", G="z+z^2/2", g="z^mu",
            Q="(1-mu^2)/(4*z^2) + 3/(4*(1+z)^2) dz2",
            ends=("0", "-1", "inf"), parameters={"mu": 2}),
        SurfaceSpecFile(
            label="kumamoto-three-end", G="((z+1)*(z^2-4*z+1))/(z-1)^3", g="z^2",
            Q="2/(z*(z-1)^2) dz2", ends=("0", "1", "inf")),
    ]


def get_example(name: str) -> SurfaceSpecFile:
    """Built-in by exact label or unique prefix."""
    examples = builtin_examples()
    for ex in examples:
        if ex.label == name:
            return ex
    hits = [ex for ex in examples if ex.label.startswith(name)]
    if len(hits) == 1:
        return hits[0]
    labels = ", ".join(ex.label for ex in examples)
    raise KeyError(f"unknown or ambiguous example {name!r}; choose one of {labels}")
