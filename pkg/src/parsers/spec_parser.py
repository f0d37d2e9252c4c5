"""
Parser and printer for the specification language

    F[0,15](R1 & F[0,15](R2)) & G[0,40](!O1)

Temporal operators take integer step intervals. Propositions are region names,
true/false, or linear predicates over signal channels such as
``px - 2*py >= 1.5``. ``U[a,b]`` parses (infix) so that fragment validation can
report it. ``#`` starts a comment.
"""

import math
import re

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from src.exceptions import InvalidIntervalError, SpecSyntaxError
from src.models.formula_models import (
    Always, And, Const, Eventually, Formula, Interval, Linear, Not, Or, RegionRef, Until,
)

GRAMMAR = r'''
?start: disj

?disj: conj
    | disj "|" conj                                  -> or_

?conj: until
    | conj "&" until                                 -> and_

?until: unary
    | unary U_OP bound "," bound "]" unary           -> until

?unary: "!" unary                                    -> not_
    | F_OP bound "," bound "]" "(" disj ")"          -> eventually
    | G_OP bound "," bound "]" "(" disj ")"          -> always
    | atom

?atom: "(" disj ")"
    | TRUE                                           -> true
    | FALSE                                          -> false
    | NAME                                           -> region
    | linpred

linpred: lin_expr CMP signed_number
lin_expr: first_term (ADDOP lin_term)*
first_term: ADDOP? lin_term
lin_term: NUMBER "*" NAME                           -> scaled
    | NAME                                           -> unit
signed_number: ADDOP? NUMBER
bound: NUMBER

F_OP.2: /F\s*\[/
G_OP.2: /G\s*\[/
U_OP.2: /U\s*\[/
TRUE: "true"
FALSE: "false"
NAME: /[A-Za-z_][A-Za-z0-9_]*/
NUMBER: /(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?/
CMP: />=|<=|>|</
ADDOP: /[+-]/
COMMENT: /#[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
'''

_INT = re.compile(r"\d+$")


class _FormulaBuilder(Transformer):
    """Turn the lark tree into formula nodes"""

    def or_(self, args):
        return Or(args[0], args[1])

    def and_(self, args):
        return And(args[0], args[1])

    def not_(self, args):
        return Not(args[0])

    def _interval(self, op: Token, lo: Token, hi: Token) -> Interval:
        for tok in (lo, hi):
            if not _INT.match(tok):
                raise SpecSyntaxError(f"interval bound {tok!s} is not an integer", tok.line, tok.column)
        try:
            return Interval(int(lo), int(hi))
        except InvalidIntervalError as e:
            raise SpecSyntaxError(str(e), op.line, op.column) from e

    def eventually(self, args):
        op, lo, hi, body = args
        return Eventually(self._interval(op, lo, hi), body)

    def always(self, args):
        op, lo, hi, body = args
        return Always(self._interval(op, lo, hi), body)

    def until(self, args):
        left, op, lo, hi, right = args
        return Until(self._interval(op, lo, hi), left, right)

    def bound(self, args):
        return args[0]

    def true(self, _args):
        return Const(True)

    def false(self, _args):
        return Const(False)

    def region(self, args):
        return RegionRef(str(args[0]))

    def scaled(self, args):
        return (str(args[1]), float(args[0]))

    def unit(self, args):
        return (str(args[0]), 1.0)

    def first_term(self, args):
        if len(args) == 2:
            sign, (name, coef) = args
            return (name, -coef if sign == "-" else coef)
        return args[0]

    def lin_expr(self, args):
        terms = [args[0]]
        for sign, (name, coef) in zip(args[1::2], args[2::2]):
            terms.append((name, -coef if sign == "-" else coef))
        return tuple(terms)

    def signed_number(self, args):
        value = float(args[-1])
        return -value if len(args) == 2 and args[0] == "-" else value

    def linpred(self, args):
        terms, cmp, bound = args
        return Linear(terms, str(cmp), bound)


class SpecParser:
    """LALR parser for specification text"""

    def __init__(self):
        self.parser = Lark(GRAMMAR, parser="lalr", propagate_positions=False)
        self.builder = _FormulaBuilder()

    def parse(self, text: str) -> Formula:
        """Parse specification text into a formula.

        Raises:
            SpecSyntaxError: with line/column of the offending token
        """
        try:
            tree = self.parser.parse(text)
        except UnexpectedEOF as e:
            lines = text.splitlines() or [""]
            raise SpecSyntaxError("unexpected end of input", len(lines), len(lines[-1]) + 1) from e
        except UnexpectedCharacters as e:
            raise SpecSyntaxError(f"unexpected character {text[e.pos_in_stream]!r}", e.line, e.column) from e
        except UnexpectedToken as e:
            if e.token.type == "$END":
                lines = text.splitlines() or [""]
                raise SpecSyntaxError("unexpected end of input", len(lines), len(lines[-1]) + 1) from e
            raise SpecSyntaxError(f"unexpected token {e.token!s}", e.line, e.column) from e
        except UnexpectedInput as e:
            raise SpecSyntaxError("cannot parse specification", e.line, e.column) from e
        try:
            return self.builder.transform(tree)
        except VisitError as e:
            if isinstance(e.orig_exc, SpecSyntaxError):
                raise e.orig_exc from None
            raise SpecSyntaxError(str(e.orig_exc)) from e


# Global instance
_parser = None


def get_parser() -> SpecParser:
    """Get or create the shared parser (building the LALR tables is not free)"""
    global _parser
    if _parser is None:
        _parser = SpecParser()
    return _parser


def parse(text: str) -> Formula:
    return get_parser().parse(text)


# precedence levels for printing
_DISJ, _CONJ, _UNTIL, _UNARY = range(4)


def _number(value: float) -> str:
    return repr(float(value))


def _format_linear(p: Linear) -> str:
    parts = []
    for i, (name, coef) in enumerate(p.terms):
        negative = math.copysign(1.0, coef) < 0
        magnitude = abs(coef)
        body = name if magnitude == 1.0 else f"{_number(magnitude)}*{name}"
        if i == 0:
            parts.append(f"-{body}" if negative else body)
        else:
            parts.append(f" - {body}" if negative else f" + {body}")
    return f"{''.join(parts)} {p.op} {_number(p.bound)}"


def _format(f: Formula, ctx: int) -> str:
    if isinstance(f, Or):
        text, prec = f"{_format(f.left, _DISJ)} | {_format(f.right, _CONJ)}", _DISJ
    elif isinstance(f, And):
        text, prec = f"{_format(f.left, _CONJ)} & {_format(f.right, _UNTIL)}", _CONJ
    elif isinstance(f, Until):
        text = f"{_format(f.left, _UNARY)} U[{f.interval.lo},{f.interval.hi}] {_format(f.right, _UNARY)}"
        prec = _UNTIL
    elif isinstance(f, Not):
        inner = f"({_format_linear(f.arg)})" if isinstance(f.arg, Linear) else _format(f.arg, _UNARY)
        text, prec = f"!{inner}", _UNARY
    elif isinstance(f, Eventually):
        text, prec = f"F[{f.interval.lo},{f.interval.hi}]({_format(f.arg, _DISJ)})", _UNARY
    elif isinstance(f, Always):
        text, prec = f"G[{f.interval.lo},{f.interval.hi}]({_format(f.arg, _DISJ)})", _UNARY
    elif isinstance(f, Linear):
        text, prec = _format_linear(f), _UNARY
    elif isinstance(f, RegionRef):
        text, prec = f.name, _UNARY
    elif isinstance(f, Const):
        text, prec = ("true" if f.value else "false"), _UNARY
    else:
        raise TypeError(f"not a formula node: {f!r}")
    return f"({text})" if prec < ctx else text


def format_formula(f: Formula) -> str:
    """Canonical text; parse(format_formula(f)) == f"""
    return _format(f, _DISJ)
