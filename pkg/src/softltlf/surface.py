"""Text syntax: parser, canonical printer, and channel lowering.

The surface grammar, lowest precedence first:

    formula := or_chain (("U" | "R") or_chain)?     U/R do not chain
    or_chain := and_chain ("||" and_chain)*
    and_chain := unary ("&&" unary)*
    unary := ("G" | "F" | "N" | "X") unary | "(" formula ")" | atom
    atom := expr ("<=" | "<" | "==" | "!=") expr
    expr := "f"<digits> | number | "x" | "y" | "px" | "py" | "vx" | "vy"
          | "speed" | "accel" | "dist" "(" number "," number ")"

`px`/`py` are aliases for `x`/`y`. `dist(p, (0.4, 0.4))` is accepted as a
spelling of `dist(0.4, 0.4)`. Comparisons between explicit feature columns
parse straight to core atoms; anything mentioning a number or a derived
measurement parses to a SurfaceAtom and only becomes a core atom through
`lower`, which assigns each distinct constant or measurement its own
feature channel.

The printer parenthesizes every operand, so parse(print_formula(rho)) == rho
holds structurally for any tree either function touches.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass

from .channels import (
    IDENTITY_PLAN,
    AccelChannel,
    ChannelSpec,
    ConstantChannel,
    CoordinateChannel,
    DistanceChannel,
    FeatureDerivationPlan,
    PassthroughChannel,
    SpeedChannel,
    VelocityChannel,
)
from .errors import BoundsError, DataError, ParseError
from .formula import (
    COMPARISON_OPS,
    And,
    Atom,
    Always,
    Constraint,
    Eventually,
    FeatureRef,
    Or,
    StrongNext,
    StrongRelease,
    WeakNext,
    WeakUntil,
)
from .semantics import TraceBatch
from .tensor import Tensor, capacity

# --------------------------------------------------------------------------
# surface expressions


class SurfaceExpr:
    __slots__ = ()


@dataclass(frozen=True)
class FeatureExpr(SurfaceExpr):
    index: int


@dataclass(frozen=True)
class NumberExpr(SurfaceExpr):
    value: float


@dataclass(frozen=True)
class MeasurementExpr(SurfaceExpr):
    """One of x, y, vx, vy, speed, accel (aliases already resolved)."""

    name: str


@dataclass(frozen=True)
class DistanceExpr(SurfaceExpr):
    ox: float
    oy: float


@dataclass(frozen=True)
class SurfaceAtom(Constraint):
    """Comparison whose sides may still mention constants or measurements."""

    op: str
    lhs: SurfaceExpr
    rhs: SurfaceExpr

    def __post_init__(self) -> None:
        if self.op not in COMPARISON_OPS:
            raise ValueError(f"unknown comparison {self.op!r}, expected one of {COMPARISON_OPS}")


# evaluation targets for lowering


@dataclass(frozen=True)
class TraceMeta:
    """Lowering target: a raw trace with this many feature columns."""

    feature_count: int


@dataclass(frozen=True)
class TrajectoryMeta:
    """Lowering target: a 2-D trajectory; velocities may be absent."""

    has_velocities: bool = True


# --------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
      (?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op><=|==|!=|&&|\|\||<|\(|\)|,|-)
    """,
    re.VERBOSE,
)

_UNARY_OPS = {"G": Always, "F": Eventually, "N": StrongNext, "X": WeakNext}
_MEASUREMENTS = ("x", "y", "vx", "vy", "speed", "accel")
_ALIASES = {"px": "x", "py": "y"}
_FEATURE_NAME_RE = re.compile(r"f(\d+)\Z")


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "name" | "op" | "end"
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    line_starts = [0] + [m.end() for m in re.finditer(r"\n", text)]

    def locate(pos: int) -> tuple[int, int]:
        line = bisect_right(line_starts, pos)
        return line, pos - line_starts[line - 1] + 1

    tokens: list[_Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            line, col = locate(pos)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        line, col = locate(pos)
        tokens.append(_Token(str(m.lastgroup), m.group(), line, col))
        pos = m.end()
    line, col = locate(n)
    tokens.append(_Token("end", "", line, col))
    return tokens


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.column)

    def expect_op(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            shown = tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        return self.take()

    def at_op(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text == text

    def at_name(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "name" and tok.text == text

    # grammar levels, lowest precedence first

    def formula(self) -> Constraint:
        left = self.or_chain()
        tok = self.peek()
        if tok.kind == "name" and tok.text in ("U", "R"):
            self.take()
            right = self.or_chain()
            node = WeakUntil(left, right) if tok.text == "U" else StrongRelease(left, right)
            after = self.peek()
            if after.kind == "name" and after.text in ("U", "R"):
                raise self.error(f"{after.text} does not chain; parenthesize one side", after)
            return node
        return left

    def or_chain(self) -> Constraint:
        node = self.and_chain()
        while self.at_op("||"):
            self.take()
            node = Or(node, self.and_chain())
        return node

    def and_chain(self) -> Constraint:
        node = self.unary()
        while self.at_op("&&"):
            self.take()
            node = And(node, self.unary())
        return node

    def unary(self) -> Constraint:
        tok = self.peek()
        if tok.kind == "name" and tok.text in _UNARY_OPS:
            self.take()
            return _UNARY_OPS[tok.text](self.unary())
        if self.at_op("("):
            self.take()
            node = self.formula()
            self.expect_op(")")
            return node
        return self.atom()

    def atom(self) -> Constraint:
        lhs = self.expr()
        tok = self.peek()
        if tok.kind != "op" or tok.text not in COMPARISON_OPS:
            shown = tok.text or "end of input"
            raise self.error(f"expected a comparison, found {shown!r}")
        op = self.take().text
        rhs = self.expr()
        if isinstance(lhs, FeatureExpr) and isinstance(rhs, FeatureExpr):
            return Atom(op, FeatureRef(lhs.index), FeatureRef(rhs.index))
        return SurfaceAtom(op, lhs, rhs)

    def expr(self) -> SurfaceExpr:
        tok = self.peek()
        if tok.kind == "number":
            self.take()
            return NumberExpr(float(tok.text))
        if self.at_op("-"):
            self.take()
            num = self.peek()
            if num.kind != "number":
                raise self.error("expected a number after '-'")
            self.take()
            return NumberExpr(-float(num.text))
        if tok.kind == "name":
            self.take()
            name = tok.text
            m = _FEATURE_NAME_RE.match(name)
            if m:
                return FeatureExpr(int(m.group(1)))
            name = _ALIASES.get(name, name)
            if name in _MEASUREMENTS:
                return MeasurementExpr(name)
            if name == "dist":
                return self.dist_args()
            raise self.error(f"unknown identifier {tok.text!r}", tok)
        shown = tok.text or "end of input"
        raise self.error(f"expected an expression, found {shown!r}")

    def dist_args(self) -> DistanceExpr:
        self.expect_op("(")
        if self.at_name("p"):
            self.take()
            self.expect_op(",")
        parenthesized = self.at_op("(")
        if parenthesized:
            self.take()
        ox = self.number()
        self.expect_op(",")
        oy = self.number()
        if parenthesized:
            self.expect_op(")")
        self.expect_op(")")
        return DistanceExpr(ox, oy)

    def number(self) -> float:
        negative = False
        if self.at_op("-"):
            self.take()
            negative = True
        tok = self.peek()
        if tok.kind != "number":
            shown = tok.text or "end of input"
            raise self.error(f"expected a number, found {shown!r}")
        self.take()
        value = float(tok.text)
        return -value if negative else value


def parse(text: str) -> Constraint:
    """Parse `text` into a constraint tree.

    Comparisons between explicit feature columns become core atoms; any atom
    mentioning a constant or a derived measurement stays a SurfaceAtom until
    lowered.
    """
    parser = _Parser(_tokenize(text))
    node = parser.formula()
    tok = parser.peek()
    if tok.kind != "end":
        raise parser.error(f"unexpected trailing input {tok.text!r}")
    return node


# --------------------------------------------------------------------------
# printer


def _print_expr(e: SurfaceExpr) -> str:
    if isinstance(e, FeatureExpr):
        return f"f{e.index}"
    if isinstance(e, NumberExpr):
        return repr(e.value)
    if isinstance(e, MeasurementExpr):
        return e.name
    if isinstance(e, DistanceExpr):
        return f"dist({e.ox!r}, {e.oy!r})"
    raise TypeError(f"not a surface expression: {e!r}")


def print_formula(rho: Constraint) -> str:
    """Canonical text for a tree; every operand parenthesized."""
    if isinstance(rho, Atom):
        return f"f{rho.lhs.index} {rho.op} f{rho.rhs.index}"
    if isinstance(rho, SurfaceAtom):
        return f"{_print_expr(rho.lhs)} {rho.op} {_print_expr(rho.rhs)}"
    if isinstance(rho, And):
        return f"({print_formula(rho.left)}) && ({print_formula(rho.right)})"
    if isinstance(rho, Or):
        return f"({print_formula(rho.left)}) || ({print_formula(rho.right)})"
    if isinstance(rho, StrongNext):
        return f"N ({print_formula(rho.operand)})"
    if isinstance(rho, WeakNext):
        return f"X ({print_formula(rho.operand)})"
    if isinstance(rho, Always):
        return f"G ({print_formula(rho.operand)})"
    if isinstance(rho, Eventually):
        return f"F ({print_formula(rho.operand)})"
    if isinstance(rho, WeakUntil):
        return f"({print_formula(rho.left)}) U ({print_formula(rho.right)})"
    if isinstance(rho, StrongRelease):
        return f"({print_formula(rho.left)}) R ({print_formula(rho.right)})"
    raise TypeError(f"not a constraint node: {rho!r}")


# --------------------------------------------------------------------------
# lowering


def _surface_exprs(rho: Constraint) -> list[SurfaceExpr]:
    """Expressions of all atoms in reading order (depth-first, lhs first)."""
    out: list[SurfaceExpr] = []
    stack = [rho]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.append(FeatureExpr(node.lhs.index))
            out.append(FeatureExpr(node.rhs.index))
        elif isinstance(node, SurfaceAtom):
            out.append(node.lhs)
            out.append(node.rhs)
        elif isinstance(node, (And, Or, WeakUntil, StrongRelease)):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, (StrongNext, WeakNext, Always, Eventually)):
            stack.append(node.operand)
        else:
            raise TypeError(f"not a constraint node: {node!r}")
    return out


def _channel_for(e: SurfaceExpr, meta: TraceMeta | TrajectoryMeta) -> ChannelSpec:
    if isinstance(meta, TraceMeta):
        if isinstance(e, NumberExpr):
            return ConstantChannel(e.value)
        raise DataError(
            f"{_print_expr(e)} is a trajectory measurement; this formula targets a raw trace"
        )
    if isinstance(e, FeatureExpr):
        raise DataError(
            f"f{e.index} names a raw trace column; this formula targets a trajectory"
        )
    if isinstance(e, NumberExpr):
        return ConstantChannel(e.value)
    if isinstance(e, DistanceExpr):
        return DistanceChannel(e.ox, e.oy)
    if isinstance(e, MeasurementExpr):
        if e.name == "x":
            return CoordinateChannel(0)
        if e.name == "y":
            return CoordinateChannel(1)
        if e.name in ("vx", "vy"):
            if not meta.has_velocities:
                raise DataError(f"{e.name} needs velocities, which this trajectory lacks")
            return VelocityChannel(0 if e.name == "vx" else 1)
        if e.name == "speed":
            return SpeedChannel()
        return AccelChannel()
    raise TypeError(f"not a surface expression: {e!r}")


def _map_atoms(rho: Constraint, index_of: dict[SurfaceExpr, int]) -> Constraint:
    if isinstance(rho, Atom):
        lhs = index_of.get(FeatureExpr(rho.lhs.index), rho.lhs.index)
        rhs = index_of.get(FeatureExpr(rho.rhs.index), rho.rhs.index)
        if lhs == rho.lhs.index and rhs == rho.rhs.index:
            return rho
        return Atom(rho.op, FeatureRef(lhs), FeatureRef(rhs))
    if isinstance(rho, SurfaceAtom):
        return Atom(rho.op, FeatureRef(index_of[rho.lhs]), FeatureRef(index_of[rho.rhs]))
    if isinstance(rho, And):
        return And(_map_atoms(rho.left, index_of), _map_atoms(rho.right, index_of))
    if isinstance(rho, Or):
        return Or(_map_atoms(rho.left, index_of), _map_atoms(rho.right, index_of))
    if isinstance(rho, StrongNext):
        return StrongNext(_map_atoms(rho.operand, index_of))
    if isinstance(rho, WeakNext):
        return WeakNext(_map_atoms(rho.operand, index_of))
    if isinstance(rho, Always):
        return Always(_map_atoms(rho.operand, index_of))
    if isinstance(rho, Eventually):
        return Eventually(_map_atoms(rho.operand, index_of))
    if isinstance(rho, WeakUntil):
        return WeakUntil(_map_atoms(rho.left, index_of), _map_atoms(rho.right, index_of))
    return StrongRelease(_map_atoms(rho.left, index_of), _map_atoms(rho.right, index_of))


def lower(
    rho: Constraint, meta: TraceMeta | TrajectoryMeta
) -> tuple[Constraint, FeatureDerivationPlan]:
    """Resolve every atom side to a feature channel.

    Against a raw trace, explicit feature references keep their column
    numbers; if constants appear, the plan passes all input columns through
    and appends one constant channel per distinct constant. Against a
    trajectory, channels are assigned to distinct expressions in reading
    order. The returned tree contains only core atoms.
    """
    exprs = _surface_exprs(rho)

    if isinstance(meta, TraceMeta):
        for e in exprs:
            if isinstance(e, FeatureExpr) and e.index >= meta.feature_count:
                raise BoundsError(
                    f"f{e.index} out of range for a {meta.feature_count}-column trace"
                )
        constants: dict[SurfaceExpr, int] = {}
        for e in exprs:
            if isinstance(e, NumberExpr) and e not in constants:
                constants[e] = meta.feature_count + len(constants)
            elif not isinstance(e, (NumberExpr, FeatureExpr)):
                _channel_for(e, meta)  # raises with the measurement's name
        if not constants:
            return _map_atoms(rho, {}), IDENTITY_PLAN
        channels: list[ChannelSpec] = [
            PassthroughChannel(i) for i in range(meta.feature_count)
        ]
        channels.extend(ConstantChannel(e.value) for e in constants)
        index_of = {FeatureExpr(i): i for i in range(meta.feature_count)}
        index_of.update(constants)
        return _map_atoms(rho, index_of), FeatureDerivationPlan(tuple(channels))

    index_of = {}
    channels = []
    for e in exprs:
        if e not in index_of:
            index_of[e] = len(channels)
            channels.append(_channel_for(e, meta))
    return _map_atoms(rho, index_of), FeatureDerivationPlan(tuple(channels))


def widen_trace(trace: TraceBatch, plan: FeatureDerivationPlan) -> TraceBatch:
    """Realize a raw-trace plan: copy input columns through, append constants.

    Plans produced by `lower` against a TraceMeta contain only passthrough
    and constant channels; anything else needs a trajectory, not a trace.
    """
    if plan.identity:
        return trace
    dims = trace.tensor.dims
    d0, d1 = dims[0], dims[1]
    b = capacity(dims[2:])
    elems = trace.tensor.elems
    out: list[float] = []
    for t in range(d0):
        for channel in plan.channels:
            if isinstance(channel, PassthroughChannel):
                base = (t * d1 + channel.index) * b
                out.extend(elems[base : base + b])
            elif isinstance(channel, ConstantChannel):
                out.extend((channel.value,) * b)
            else:
                raise DataError(
                    f"channel {channel.describe()!r} needs a trajectory, not a raw trace"
                )
    return TraceBatch(Tensor((d0, len(plan.channels)) + dims[2:], tuple(out)))


def narrow_gradient(grad: Tensor, plan: FeatureDerivationPlan, feature_count: int) -> Tensor:
    """Project a widened-trace gradient back onto the input columns.

    Constant columns are not inputs, so their entries drop; passthrough
    columns route to the source column they copied.
    """
    if plan.identity:
        return grad
    dims = grad.dims
    d0, width = dims[0], dims[1]
    if width != len(plan.channels):
        raise DataError(
            f"gradient has {width} columns but the plan builds {len(plan.channels)}"
        )
    b = capacity(dims[2:])
    out = [0.0] * (d0 * feature_count * b)
    for c, channel in enumerate(plan.channels):
        if not isinstance(channel, PassthroughChannel):
            continue
        for t in range(d0):
            src = (t * width + c) * b
            dst = (t * feature_count + channel.index) * b
            for k in range(b):
                out[dst + k] += grad.elems[src + k]
    return Tensor((d0, feature_count) + dims[2:], tuple(out))
