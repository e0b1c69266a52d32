"""First-order logic over graphs.

Concrete syntax::

    exists x. forall y. (E(x,y) | x = y)

Tokens are ``exists``, ``forall``, ``E(..,..)``, ``=``, ``!``, ``&``, ``|``,
``->`` and parentheses; variables match ``[a-z][a-z0-9_]*``.  Precedence is
``!`` > ``&`` > ``|`` > ``->`` (right associative) and quantifier bodies
extend as far right as possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Mapping, Optional, Union

from .decomp import Partition
from .errors import CapExceeded
from .graph import Graph, iter_bits

__all__ = [
    "Edge",
    "Eq",
    "Not",
    "And",
    "Or",
    "Implies",
    "Exists",
    "Forall",
    "Formula",
    "FormulaSyntaxError",
    "parse_formula",
    "parse_sentence",
    "to_text",
    "free_variables",
    "quantifier_rank",
    "evaluate",
    "compile_formula",
    "XiParams",
    "build_xi",
    "eval_xi_fast",
    "xi_relation",
    "XiFailure",
    "xi_partition",
    "ef_equivalent",
    "SENTENCE_LIBRARY",
    "library_sentences",
]


# --- syntax tree --------------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    x: str
    y: str


@dataclass(frozen=True)
class Eq:
    x: str
    y: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Edge, Eq, Not, And, Or, Implies, Exists, Forall]


def free_variables(phi: Formula) -> frozenset:
    if isinstance(phi, (Edge, Eq)):
        return frozenset((phi.x, phi.y))
    if isinstance(phi, Not):
        return free_variables(phi.body)
    if isinstance(phi, (And, Or)):
        return frozenset().union(*(free_variables(p) for p in phi.parts))
    if isinstance(phi, Implies):
        return free_variables(phi.left) | free_variables(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return free_variables(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def quantifier_rank(phi: Formula) -> int:
    if isinstance(phi, (Edge, Eq)):
        return 0
    if isinstance(phi, Not):
        return quantifier_rank(phi.body)
    if isinstance(phi, (And, Or)):
        return max((quantifier_rank(p) for p in phi.parts), default=0)
    if isinstance(phi, Implies):
        return max(quantifier_rank(phi.left), quantifier_rank(phi.right))
    if isinstance(phi, (Exists, Forall)):
        return 1 + quantifier_rank(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


# --- parsing ------------------------------------------------------------------


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(?:(->)|([()!&|=.,])|([a-z][a-z0-9_]*)|(E)(?![A-Za-z0-9_]))")
_KEYWORDS = {"exists", "forall"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        arrow, sym, word, edge = m.groups()
        if arrow:
            out.append(("op", "->", start))
        elif sym:
            out.append(("op", sym, start))
        elif edge:
            out.append(("E", "E", start))
        elif word in _KEYWORDS:
            out.append(("kw", word, start))
        else:
            out.append(("var", word, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str, value: Optional[str] = None):
        tok = self.toks[self.i]
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = tok[1] if tok[0] != "end" else "end of input"
            raise FormulaSyntaxError(f"expected {want!r}, found {got!r}", tok[2])
        self.i += 1
        return tok

    def at_op(self, value: str) -> bool:
        tok = self.peek()
        return tok[0] == "op" and tok[1] == value

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.at_op("->"):
            self.i += 1
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.at_op("|"):
            self.i += 1
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.at_op("&"):
            self.i += 1
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        if self.at_op("!"):
            self.i += 1
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "kw":
            self.i += 1
            var = self.take("var")[1]
            self.take("op", ".")
            body = self.implication()
            return Exists(var, body) if value == "exists" else Forall(var, body)
        if kind == "E":
            self.i += 1
            self.take("op", "(")
            x = self.take("var")[1]
            self.take("op", ",")
            y = self.take("var")[1]
            self.take("op", ")")
            return Edge(x, y)
        if kind == "var":
            self.i += 1
            self.take("op", "=")
            return Eq(value, self.take("var")[1])
        if kind == "op" and value == "(":
            self.i += 1
            inner = self.implication()
            self.take("op", ")")
            return inner
        got = value if kind != "end" else "end of input"
        raise FormulaSyntaxError(f"expected a formula, found {got!r}", pos)


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    phi = p.implication()
    p.take("end")
    return phi


def parse_sentence(text: str) -> Formula:
    """Parse and require that no variable occurs free."""
    phi = parse_formula(text)
    free = free_variables(phi)
    if free:
        raise ValueError(f"unbound variable(s) in sentence: {', '.join(sorted(free))}")
    return phi


# --- printing -----------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3, Not: 4, Edge: 5, Eq: 5, Exists: 0, Forall: 0}


def to_text(phi: Formula) -> str:
    """Render ``phi`` in the concrete syntax; ``parse_formula(to_text(phi)) == phi``."""
    if isinstance(phi, Edge):
        return f"E({phi.x},{phi.y})"
    if isinstance(phi, Eq):
        return f"{phi.x} = {phi.y}"
    if isinstance(phi, Not):
        inner = to_text(phi.body)
        return f"!{inner}" if isinstance(phi.body, (Edge, Not)) else f"!({inner})"
    if isinstance(phi, (Exists, Forall)):
        kw = "exists" if isinstance(phi, Exists) else "forall"
        return f"{kw} {phi.var}. {to_text(phi.body)}"
    if isinstance(phi, (And, Or)):
        mine = _PREC[type(phi)]
        sep = " & " if isinstance(phi, And) else " | "
        return sep.join(_wrap(p, _PREC[type(p)] <= mine) for p in phi.parts)
    if isinstance(phi, Implies):
        left = _wrap(phi.left, _PREC[type(phi.left)] <= 1)
        right = _wrap(phi.right, _PREC[type(phi.right)] < 1)
        return f"{left} -> {right}"
    raise TypeError(f"not a formula: {phi!r}")


def _wrap(phi: Formula, paren: bool) -> str:
    s = to_text(phi)
    return f"({s})" if paren else s


# --- evaluation ---------------------------------------------------------------

_Compiled = Callable[[tuple, int, list], bool]


def _variables(phi: Formula, acc: dict) -> None:
    if isinstance(phi, (Edge, Eq)):
        acc.setdefault(phi.x, len(acc))
        acc.setdefault(phi.y, len(acc))
    elif isinstance(phi, Not):
        _variables(phi.body, acc)
    elif isinstance(phi, (And, Or)):
        for p in phi.parts:
            _variables(p, acc)
    elif isinstance(phi, Implies):
        _variables(phi.left, acc)
        _variables(phi.right, acc)
    else:
        acc.setdefault(phi.var, len(acc))
        _variables(phi.body, acc)


def _compile(phi: Formula, slot: dict) -> _Compiled:
    if isinstance(phi, Edge):
        i, j = slot[phi.x], slot[phi.y]
        return lambda adj, n, env: ((adj[env[i]] >> env[j]) & 1) == 1
    if isinstance(phi, Eq):
        i, j = slot[phi.x], slot[phi.y]
        return lambda adj, n, env: env[i] == env[j]
    if isinstance(phi, Not):
        f = _compile(phi.body, slot)
        return lambda adj, n, env: not f(adj, n, env)
    if isinstance(phi, And):
        fs = tuple(_compile(p, slot) for p in phi.parts)
        return lambda adj, n, env: all(f(adj, n, env) for f in fs)
    if isinstance(phi, Or):
        fs = tuple(_compile(p, slot) for p in phi.parts)
        return lambda adj, n, env: any(f(adj, n, env) for f in fs)
    if isinstance(phi, Implies):
        a, b = _compile(phi.left, slot), _compile(phi.right, slot)
        return lambda adj, n, env: (not a(adj, n, env)) or b(adj, n, env)
    i = slot[phi.var]
    body = _compile(phi.body, slot)
    want = isinstance(phi, Exists)

    def quant(adj, n, env):
        saved = env[i]
        try:
            for a in range(n):
                env[i] = a
                if body(adj, n, env) == want:
                    return want
            return not want
        finally:
            env[i] = saved

    return quant


class CompiledFormula:
    """A formula turned into nested closures over a variable environment.

    This is the plain Tarskian semantics (every quantifier ranges over all
    vertices), so a formula of rank ``r`` costs ``O(n^r |phi|)``.
    """

    def __init__(self, phi: Formula):
        self.formula = phi
        self.free = free_variables(phi)
        slot: dict = {}
        _variables(phi, slot)
        self.slot = slot
        self._fn = _compile(phi, slot)

    def __call__(self, g: Graph, assignment: Optional[Mapping[str, int]] = None) -> bool:
        assignment = assignment or {}
        env = [0] * len(self.slot)
        for v in self.free:
            if v not in assignment:
                raise ValueError(f"no value assigned to free variable {v!r}")
        for name, val in assignment.items():
            if name in self.slot:
                if not 1 <= val <= g.n:
                    raise ValueError(f"variable {name!r} assigned vertex {val} outside 1..{g.n}")
                env[self.slot[name]] = val - 1
        return self._fn(g.adj, g.n, env)


@lru_cache(maxsize=256)
def compile_formula(phi: Formula) -> CompiledFormula:
    return CompiledFormula(phi)


def evaluate(g: Graph, phi: Formula, assignment: Optional[Mapping[str, int]] = None) -> bool:
    """Truth value of ``phi`` in ``g`` under ``assignment`` (1-based vertices)."""
    return compile_formula(phi)(g, assignment)


# --- the partition-defining formula ---------------------------------------------


@dataclass(frozen=True)
class XiParams:
    l: int
    d: int

    def __post_init__(self):
        if self.l < 1 or self.d < 0:
            raise ValueError("need l >= 1 and d >= 0")

    @property
    def m(self) -> int:
        return (self.l + 1) * self.d + 1

    @property
    def q(self) -> int:
        return 2 + self.l * self.m


def build_xi(l: int, d: int) -> Formula:
    """``xi(x, y)``: (l-1) blocks of m distinct common neighbours, blocks completely joined.

    Variables are ``z1..z{(l-1)m}``; block ``b`` holds ``z{(b-1)m+1}..z{bm}``.
    """
    if l < 2:
        raise ValueError("xi needs l >= 2")
    m = XiParams(l, d).m
    zs = [f"z{i}" for i in range(1, (l - 1) * m + 1)]
    conj: list = []
    for a, b in combinations(zs, 2):
        conj.append(Not(Eq(a, b)))
    for z in zs:
        conj.append(Edge(z, "x"))
        conj.append(Edge(z, "y"))
    for k in range(2, l):
        for i in range(1, (k - 1) * m + 1):
            for j in range((k - 1) * m + 1, (l - 1) * m + 1):
                conj.append(Edge(zs[i - 1], zs[j - 1]))
    # drop the duplicates produced by overlapping k ranges, keep first occurrences
    seen = set()
    uniq = []
    for c in conj:
        if c not in seen:
            seen.add(c)
            uniq.append(c)
    phi: Formula = uniq[0] if len(uniq) == 1 else And(tuple(uniq))
    for z in reversed(zs):
        phi = Exists(z, phi)
    return phi


def eval_xi_fast(g: Graph, p: XiParams, u: int, v: int) -> bool:
    """Decide ``G |= xi(u, v)`` by searching for the blocks inside the common neighbourhood."""
    if p.l < 2:
        raise ValueError("xi needs l >= 2")
    g._check(u)
    g._check(v)
    adj = g.adj
    common = adj[u - 1] & adj[v - 1]
    m = p.m
    blocks = p.l - 1
    if common.bit_count() < m * blocks:
        return False
    if blocks == 1:
        return True

    def place(b: int, cand: int) -> bool:
        # choose block b (m vertices) from cand; later blocks must be joined to all of it
        if b == blocks:
            return True
        need_after = m * (blocks - b - 1)
        order = sorted(iter_bits(cand), key=lambda w: -(adj[w] & cand).bit_count())

        def choose(start: int, picked: int, joint: int) -> bool:
            if picked == m:
                return place(b + 1, joint)
            for idx in range(start, len(order)):
                if len(order) - idx < m - picked:
                    return False
                w = order[idx]
                nj = joint & adj[w]
                if nj.bit_count() < need_after:
                    continue
                if choose(idx + 1, picked + 1, nj):
                    return True
            return False

        return choose(0, 0, cand)

    return place(0, common)


def xi_relation(g: Graph, p: XiParams) -> list[int]:
    """Row masks (0-based) of the reflexively closed relation defined by xi."""
    rows = [1 << i for i in range(g.n)]
    for a in range(g.n):
        for b in range(a + 1, g.n):
            if eval_xi_fast(g, p, a + 1, b + 1):
                rows[a] |= 1 << b
                rows[b] |= 1 << a
    return rows


@dataclass(frozen=True)
class XiFailure:
    """Why xi does not define a partition into l parts.  Falsy.

    ``kind`` is ``"non-transitive"`` (``witness`` = ``(u, v, w)`` with uRv,
    vRw and not uRw) or ``"class-count"`` (``witness`` = number of classes found).
    """

    kind: str
    witness: tuple

    def __bool__(self) -> bool:
        return False


def xi_partition(g: Graph, p: XiParams):
    """The partition defined by xi, or an :class:`XiFailure`."""
    rows = xi_relation(g, p)
    for a in range(g.n):
        for b in iter_bits(rows[a]):
            if rows[b] != rows[a]:
                # some w related to one of a, b but not the other
                diff = rows[a] ^ rows[b]
                w = (diff & -diff).bit_length() - 1
                if (rows[a] >> w) & 1:
                    return XiFailure("non-transitive", (b + 1, a + 1, w + 1))
                return XiFailure("non-transitive", (a + 1, b + 1, w + 1))
    classes = []
    seen = 0
    for a in range(g.n):
        if not (seen >> a) & 1:
            classes.append(rows[a])
            seen |= rows[a]
    if len(classes) != p.l:
        return XiFailure("class-count", (len(classes),))
    assign = [0] * g.n
    for i, c in enumerate(classes, start=1):
        for v in iter_bits(c):
            assign[v] = i
    return Partition(p.l, tuple(assign), "unordered-nonempty")


# --- Ehrenfeucht-Fraisse games ----------------------------------------------------


def _atomic_ok(g: Graph, h: Graph, pairs: tuple, a: int, b: int) -> bool:
    """Can the pebble pair (a, b) be added to the partial isomorphism ``pairs``?"""
    ga, hb = g.adj[a], h.adj[b]
    for x, y in pairs:
        if (x == a) != (y == b):
            return False
        if ((ga >> x) & 1) != ((hb >> y) & 1):
            return False
    return True


def ef_equivalent(g: Graph, h: Graph, k: int, max_rounds: int = 3, max_vertices: int = 12) -> bool:
    """Whether Duplicator wins the ``k``-round Ehrenfeucht-Fraisse game on ``g`` and ``h``.

    Positions are memoised by the set of pebbled pairs (order of play does not
    matter) and the number of rounds left.  The last round is settled by
    comparing the sets of one-step extension types on both sides.
    """
    if k > max_rounds:
        raise CapExceeded(f"k={k} exceeds the EF round cap {max_rounds}")
    if max(g.n, h.n) > max_vertices:
        raise CapExceeded(f"graphs larger than {max_vertices} vertices")
    if k < 0:
        raise ValueError("k must be nonnegative")
    memo: dict = {}

    def ext_types(gr: Graph, pebbles: tuple) -> frozenset:
        out = set()
        for a in range(gr.n):
            row = gr.adj[a]
            out.add(tuple((x == a, (row >> x) & 1) for x in pebbles))
        return frozenset(out)

    def wins(pairs: frozenset, rounds: int) -> bool:
        if rounds == 0:
            return True
        key = (pairs, rounds)
        if key in memo:
            return memo[key]
        ordered = tuple(sorted(pairs))
        if rounds == 1:
            res = ext_types(g, tuple(x for x, _ in ordered)) == ext_types(h, tuple(y for _, y in ordered))
            memo[key] = res
            return res
        res = True
        for a in range(g.n):
            if not any(_atomic_ok(g, h, ordered, a, b) and wins(pairs | {(a, b)}, rounds - 1) for b in range(h.n)):
                res = False
                break
        if res:
            for b in range(h.n):
                if not any(_atomic_ok(g, h, ordered, a, b) and wins(pairs | {(a, b)}, rounds - 1) for a in range(g.n)):
                    res = False
                    break
        memo[key] = res
        return res

    if (g.n == 0) != (h.n == 0):
        return k == 0
    return wins(frozenset(), k)


# --- bundled sentences ------------------------------------------------------------

SENTENCE_LIBRARY: tuple[str, ...] = (
    "forall x. x = x",
    "exists x. x = x",
    "exists x. E(x,x)",
    "exists x. exists y. E(x,y)",
    "exists x. exists y. !(x = y)",
    "forall x. forall y. !E(x,y)",
    "forall x. exists y. E(x,y)",
    "exists x. forall y. !E(x,y)",
    "exists x. forall y. (E(x,y) | x = y)",
    "forall x. forall y. (x = y | E(x,y))",
    "exists x. exists y. (!(x = y) & !E(x,y))",
    "forall x. exists y. (!(x = y) & !E(x,y))",
    "exists x. exists y. exists z. (E(x,y) & E(y,z) & E(x,z))",
    "exists x. exists y. exists z. (E(x,y) & E(y,z) & !E(x,z) & !(x = z))",
    "exists x. exists y. exists z. (!(x = y) & !(y = z) & !(x = z))",
    "exists x. exists y. exists z. (!E(x,y) & !E(y,z) & !E(x,z) & !(x = y) & !(y = z) & !(x = z))",
    "forall x. forall y. (E(x,y) -> exists z. (E(x,z) & E(y,z)))",
    "forall x. exists y. exists z. (E(x,y) & E(x,z) & !(y = z))",
    "exists x. forall y. forall z. (E(x,y) & E(x,z) -> y = z)",
    "forall x. forall y. (!(x = y) -> exists z. (E(x,z) & E(y,z)))",
    "forall x. forall y. forall z. (E(x,y) & E(y,z) -> E(x,z) | x = z)",
    "exists x. exists y. (E(x,y) & forall z. (E(x,z) -> z = y))",
    "forall x. forall y. (!E(x,y) & !(x = y) -> exists z. (E(x,z) & E(y,z)))",
    "exists x. forall y. (E(x,y) -> exists z. (E(y,z) & !(z = x)))",
    "forall x. exists y. (E(x,y) & forall z. (E(y,z) -> z = x))",
)


@lru_cache(maxsize=1)
def library_sentences() -> tuple[tuple[Formula, int], ...]:
    """Parsed library with quantifier ranks."""
    out = []
    for text in SENTENCE_LIBRARY:
        phi = parse_sentence(text)
        out.append((phi, quantifier_rank(phi)))
    return tuple(out)
