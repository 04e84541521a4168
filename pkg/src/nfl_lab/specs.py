"""Parser for the call-style spec strings used in configs.

Grammar::

    call   := NAME [ "(" [ arg ("," arg)* ] ")" ]
    arg    := [ NAME "=" ] value
    value  := NUMBER | STRING | list | call
    list   := "[" [ value ("," value)* ] "]"

A bare NAME parses as a zero-argument call, so ``folds=loo`` and
``candidates=[majority]`` read naturally.  Quoted strings use single or
double quotes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class SpecError(ValueError):
    """A spec string is malformed or names a bad parameter."""


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple = ()
    kwargs: dict = field(default_factory=dict)

    def __hash__(self):
        return hash((self.name, self.args, tuple(sorted(self.kwargs.items(), key=lambda kv: kv[0]))))

    def __str__(self) -> str:
        parts = [_fmt(a) for a in self.args] + [f"{k}={_fmt(v)}" for k, v in self.kwargs.items()]
        return format_call(self.name, parts)

    def bind(self, params: list[str], defaults: dict | None = None) -> dict:
        """Map positional and keyword args onto ``params``.

        Every parameter without a default is required; unknown keywords and
        surplus positionals raise ``SpecError`` naming the offending field.
        """
        defaults = defaults or {}
        if len(self.args) > len(params):
            raise SpecError(f"{self.name}() takes at most {len(params)} arguments")
        bound = dict(zip(params, self.args))
        for key, value in self.kwargs.items():
            if key not in params:
                raise SpecError(f"{self.name}() got an unknown parameter {key!r}")
            if key in bound:
                raise SpecError(f"{self.name}() got multiple values for {key!r}")
            bound[key] = value
        for p in params:
            if p not in bound:
                if p not in defaults:
                    raise SpecError(f"{self.name}() missing required parameter {p!r}")
                bound[p] = defaults[p]
        return bound


def _fmt(value) -> str:
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_fmt(v) for v in value) + "]"
    if isinstance(value, str):
        return repr(value)
    return str(value)


def format_call(name: str, parts: list) -> str:
    if not parts:
        return name
    return f"{name}({', '.join(parts)})"


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<str>'[^']*'|"[^"]*")
      | (?P<punct>[()\[\],=])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SpecError(f"unexpected character at position {pos} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise SpecError(f"expected {value or 'a token'} in {self.text!r}")
        self.i += 1
        return tok

    def value(self):
        kind, tok = self.peek()
        if kind == "num":
            self.i += 1
            return float(tok) if any(c in tok for c in ".eE") else int(tok)
        if kind == "str":
            self.i += 1
            return tok[1:-1]
        if tok == "[":
            self.i += 1
            items = []
            if self.peek()[1] != "]":
                items.append(self.value())
                while self.peek()[1] == ",":
                    self.i += 1
                    items.append(self.value())
            self.take("]")
            return items
        if kind == "name":
            return self.call()
        raise SpecError(f"unexpected {tok!r} in {self.text!r}")

    def call(self) -> Call:
        _, name = self.take()
        args, kwargs = [], {}
        if self.peek()[1] == "(":
            self.i += 1
            while self.peek()[1] != ")":
                if self.peek()[0] == "name" and self.i + 1 < len(self.tokens) and self.tokens[self.i + 1][1] == "=":
                    key = self.take()[1]
                    self.take("=")
                    if key in kwargs:
                        raise SpecError(f"duplicate parameter {key!r} in {self.text!r}")
                    kwargs[key] = self.value()
                else:
                    if kwargs:
                        raise SpecError(f"positional argument after keyword in {self.text!r}")
                    args.append(self.value())
                if self.peek()[1] == ",":
                    self.i += 1
                elif self.peek()[1] != ")":
                    raise SpecError(f"expected ',' or ')' in {self.text!r}")
            self.take(")")
        return Call(name.lower(), tuple(_freeze(a) for a in args), {k: _freeze(v) for k, v in kwargs.items()})


def _freeze(value):
    return tuple(value) if isinstance(value, list) else value


def parse_call(text: str) -> Call:
    if isinstance(text, Call):
        return text
    parser = _Parser(str(text))
    if not parser.tokens:
        raise SpecError("empty spec string")
    call = parser.call()
    if parser.i != len(parser.tokens):
        raise SpecError(f"trailing input after {call.name!r} in {text!r}")
    return call


def as_name(value) -> str:
    """Accept ``loo`` (a bare call) or ``'loo'`` as the same identifier."""
    if isinstance(value, Call) and not value.args and not value.kwargs:
        return value.name
    if isinstance(value, str):
        return value.lower()
    raise SpecError(f"expected an identifier, got {value!r}")
