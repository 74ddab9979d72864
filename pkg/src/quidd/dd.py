"""Reduced, ordered, hash-consed decision diagrams with complex terminals.

Nodes live in an arena owned by a :class:`Manager` and are referred to by
integer handles. Children are always allocated before their parents, so a
handle is larger than the handles of everything below it.

Variables are encoded as integer *levels*: row variable ``R_q`` is level
``2q`` and column variable ``C_q`` is level ``2q + 1``, giving the order
``R_0 < C_0 < R_1 < C_1 < ...``. State diagrams only use even levels.
"""
from __future__ import annotations

import gc
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

# Terminal "level": sorts after every variable.
TERMINAL = 1 << 30

#: Terminal keys use a grid of step ``QUANTUM`` relative to the value's
#: binade, so tiny amplitudes (2^-32 at 64 qubits) keep full resolution and
#: scaling by a power of two maps grid cells onto grid cells.
QUANTUM = 2.0 ** -33
#: Values whose larger component is below this are the zero terminal.
ZERO_FLOOR = 1e-13
# binade edges sit at 2^k / _EDGE_SHIFT instead of at powers of two, which
# are exactly where well-behaved amplitudes (1, 1/2, ...) live
_EDGE_SHIFT = 1.37
ZERO_KEY = (0, 0, 0)
#: Tolerance for every complex-equality decision outside the unique table.
EPS = 1e-9

# Apply/matmul recurse once per variable level; 1000-qubit operators need
# a few thousand frames.
if sys.getrecursionlimit() < 50_000:
    sys.setrecursionlimit(50_000)


class DDError(ValueError):
    pass


@contextmanager
def gc_paused():
    """Suspend the cyclic collector while building large diagrams.

    Node and cache tables hold millions of small tuples; repeated full
    collections over them turn linear construction loops quadratic.
    """
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


class VarId(NamedTuple):
    kind: str  # "R" or "C"
    qubit: int

    @property
    def level(self) -> int:
        return 2 * self.qubit + (1 if self.kind == "C" else 0)

    @classmethod
    def from_level(cls, level: int) -> "VarId":
        return cls("C" if level & 1 else "R", level >> 1)

    def __str__(self):
        return f"{self.kind}{self.qubit}"


def row(q: int) -> VarId:
    return VarId("R", q)


def col(q: int) -> VarId:
    return VarId("C", q)


def _level(var) -> int:
    if isinstance(var, VarId):
        return var.level
    return int(var)


def quantize(v: complex) -> tuple[int, int, int]:
    """Unique-table key of a complex value: (binade, re cell, im cell)."""
    re, im = v.real, v.imag
    m = max(abs(re), abs(im))
    if m < ZERO_FLOOR:
        return ZERO_KEY
    e = math.frexp(m * _EDGE_SHIFT)[1]
    scale = math.ldexp(1.0, -e) / QUANTUM
    return (e, round(re * scale), round(im * scale))


@dataclass(frozen=True)
class BinaryOp:
    """A pointwise binary operation usable with :meth:`Manager.apply`.

    ``name`` is the compute-cache tag, so two ops with the same name must
    compute the same function.
    """

    name: str
    fn: Callable[[complex, complex], complex]
    commutative: bool = False


@dataclass(frozen=True)
class UnaryOp:
    name: str
    fn: Callable[[complex], complex]


def _div(x, y):
    if y == 0:
        raise ZeroDivisionError("division by a zero terminal")
    return x / y


def _min_modulus(x, y):
    return x if abs(x) <= abs(y) else y


ADD = BinaryOp("+", lambda x, y: x + y, commutative=True)
SUB = BinaryOp("-", lambda x, y: x - y)
MUL = BinaryOp("*", lambda x, y: x * y, commutative=True)
DIV = BinaryOp("/", _div)
MIN_MODULUS = BinaryOp("minmod", _min_modulus, commutative=True)

CONJ = UnaryOp("conj", lambda x: x.conjugate())
MODULUS = UnaryOp("abs", abs)
CEIL_MODULUS = UnaryOp("ceilabs", lambda x: 0.0 if quantize(x) == ZERO_KEY else 1.0)


def scalar_mul(c: complex) -> UnaryOp:
    c = complex(c)
    return UnaryOp(f"smul{quantize(c)}:{c!r}", lambda x: x * c)


def scalar_div(c: complex) -> UnaryOp:
    c = complex(c)
    if c == 0:
        raise ZeroDivisionError("scalar division by zero")
    return UnaryOp(f"sdiv{quantize(c)}:{c!r}", lambda x: x / c)


@dataclass
class DDStats:
    node_count: int
    support: set
    terminal_values: list


class Manager:
    """Arena of unique DD nodes plus the Apply compute cache.

    Not thread-safe; confine a manager (and its handles) to one thread at a
    time.
    """

    def __init__(self):
        self._var: list[int] = []
        self._hi: list[int] = []
        self._lo: list[int] = []
        self._val: list = []
        self._unique: dict[tuple[int, int, int], int] = {}
        self._terminals: dict[tuple[int, int, int], int] = {}
        self._cache: dict = {}
        self._counts: dict[int, int] = {}
        self._identity: dict[int, list[int]] = {}
        self.zero = self.terminal(0.0)
        self.one = self.terminal(1.0)

    def __len__(self):
        return len(self._var)

    # -- node construction ---------------------------------------------------

    def terminal(self, v) -> int:
        v = complex(v)
        re, im = v.real, v.imag
        if not (math.isfinite(re) and math.isfinite(im)):
            raise DDError(f"terminal value must be finite, got {v!r}")
        key = quantize(v)
        u = self._terminals.get(key)
        if u is None:
            u = len(self._var)
            self._var.append(TERMINAL)
            self._hi.append(-1)
            self._lo.append(-1)
            self._val.append(complex(re if key[1] else 0.0, im if key[2] else 0.0))
            self._terminals[key] = u
        return u

    make_terminal = terminal

    def ite(self, var, then: int, else_: int) -> int:
        """Return the unique node testing ``var`` with the given children."""
        level = _level(var)
        if then == else_:
            return then
        if level >= self._var[then] or level >= self._var[else_]:
            raise DDError(
                f"variable {VarId.from_level(level)} does not precede its children")
        return self._node(level, then, else_)

    def _node(self, level: int, then: int, else_: int) -> int:
        # unchecked ite for internal callers that respect the order
        if then == else_:
            return then
        key = (level, then, else_)
        u = self._unique.get(key)
        if u is None:
            u = len(self._var)
            self._var.append(level)
            self._hi.append(then)
            self._lo.append(else_)
            self._val.append(None)
            self._unique[key] = u
        return u

    # -- accessors -----------------------------------------------------------

    def is_terminal(self, u: int) -> bool:
        return self._var[u] == TERMINAL

    def level(self, u: int) -> int:
        return self._var[u]

    def var(self, u: int) -> VarId | None:
        lv = self._var[u]
        return None if lv == TERMINAL else VarId.from_level(lv)

    def value(self, u: int) -> complex:
        v = self._val[u]
        if v is None:
            raise DDError(f"node {u} is not a terminal")
        return v

    def then(self, u: int) -> int:
        return self._hi[u]

    def else_(self, u: int) -> int:
        return self._lo[u]

    def cofactors(self, u: int, level: int) -> tuple[int, int]:
        """(then, else) cofactors of ``u`` with respect to ``level``."""
        if self._var[u] == level:
            return self._hi[u], self._lo[u]
        return u, u

    # -- Apply ---------------------------------------------------------------

    def apply(self, a: int, b: int, op: BinaryOp) -> int:
        """Pointwise ``op(a, b)``; the classic memoized Apply recursion."""
        var, hi, lo, val = self._var, self._hi, self._lo, self._val
        cache = self._cache
        terminal, node = self.terminal, self._node
        tag, fn, comm = op.name, op.fn, op.commutative
        zero, one = self.zero, self.one
        is_mul, is_add = op is MUL, op is ADD

        def rec(a, b):
            if is_mul:
                if a == zero or b == zero:
                    return zero
                if a == one:
                    return b
                if b == one:
                    return a
            elif is_add:
                if a == zero:
                    return b
                if b == zero:
                    return a
            va, vb = var[a], var[b]
            if va == TERMINAL and vb == TERMINAL:
                return terminal(fn(val[a], val[b]))
            key = (tag, b, a) if comm and b < a else (tag, a, b)
            r = cache.get(key)
            if r is not None:
                return r
            if va < vb:
                v = va
                t = rec(hi[a], b)
                e = rec(lo[a], b)
            elif vb < va:
                v = vb
                t = rec(a, hi[b])
                e = rec(a, lo[b])
            else:
                v = va
                t = rec(hi[a], hi[b])
                e = rec(lo[a], lo[b])
            r = node(v, t, e)
            cache[key] = r
            return r

        return rec(a, b)

    apply_binary = apply

    def apply_unary(self, a: int, op: UnaryOp) -> int:
        var, hi, lo, val = self._var, self._hi, self._lo, self._val
        cache = self._cache
        terminal, node = self.terminal, self._node
        tag, fn = op.name, op.fn

        def rec(a):
            if var[a] == TERMINAL:
                return terminal(fn(val[a]))
            key = (tag, a)
            r = cache.get(key)
            if r is None:
                r = node(var[a], rec(hi[a]), rec(lo[a]))
                cache[key] = r
            return r

        return rec(a)

    def clear_cache(self):
        self._cache.clear()

    @property
    def cache_size(self) -> int:
        return len(self._cache)

    # -- structure queries ---------------------------------------------------

    def reachable(self, root: int) -> list[int]:
        """Handles reachable from ``root`` in increasing (topological) order."""
        seen = {root}
        stack = [root]
        var, hi, lo = self._var, self._hi, self._lo
        while stack:
            u = stack.pop()
            if var[u] != TERMINAL:
                for c in (hi[u], lo[u]):
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
        return sorted(seen)

    def node_count(self, root: int) -> int:
        n = self._counts.get(root)
        if n is None:
            n = len(self.reachable(root))
            self._counts[root] = n
        return n

    def stats(self, root: int) -> DDStats:
        nodes = self.reachable(root)
        support = {VarId.from_level(self._var[u]) for u in nodes if self._var[u] != TERMINAL}
        terms = [self._val[u] for u in nodes if self._var[u] == TERMINAL]
        self._counts[root] = len(nodes)
        return DDStats(len(nodes), support, terms)

    dd_stats = stats

    def support_levels(self, root: int) -> set[int]:
        return {self._var[u] for u in self.reachable(root) if self._var[u] != TERMINAL}

    def terminals(self, root: int) -> list[int]:
        return [u for u in self.reachable(root) if self._var[u] == TERMINAL]

    def identity_nodes(self, n: int) -> list[int]:
        """``ids[j]`` is the identity on qubits ``j..n-1`` (``ids[n]`` is 1)."""
        ids = self._identity.get(n)
        if ids is None:
            ids = [self.one] * (n + 1)
            z = self.zero
            for j in range(n - 1, -1, -1):
                sub = ids[j + 1]
                one_branch = self._node(2 * j + 1, sub, z)
                zero_branch = self._node(2 * j + 1, z, sub)
                ids[j] = self._node(2 * j, one_branch, zero_branch)
            self._identity[n] = ids
        return ids

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, root: int, assignment: dict[int, int]) -> complex:
        """Follow one path; ``assignment`` maps level -> bit (missing = 0)."""
        u = root
        var, hi, lo = self._var, self._hi, self._lo
        while var[u] != TERMINAL:
            u = hi[u] if assignment.get(var[u], 0) else lo[u]
        return self._val[u]

    def flatten(self, root: int, positions: dict[int, int], nbits: int):
        """Local arrays (pos, hi, lo, vals, root) for the kernel layer."""
        nodes = self.reachable(root)
        local = {u: i for i, u in enumerate(nodes)}
        k = len(nodes)
        pos = np.empty(k, dtype=np.int64)
        hi = np.zeros(k, dtype=np.int64)
        lo = np.zeros(k, dtype=np.int64)
        vals = np.zeros(k, dtype=np.complex128)
        for i, u in enumerate(nodes):
            lv = self._var[u]
            if lv == TERMINAL:
                pos[i] = nbits
                vals[i] = self._val[u]
            else:
                pos[i] = positions[lv]
                hi[i] = local[self._hi[u]]
                lo[i] = local[self._lo[u]]
        return pos, hi, lo, vals, local[root]

    def from_function(self, values: np.ndarray, levels: list[int]) -> int:
        """Compile a dense table into a DD.

        ``values`` has length ``2**len(levels)``; index bit ``p`` (from the
        most significant end) is the value of variable ``levels[p]``.
        """
        values = np.asarray(values, dtype=np.complex128).ravel()
        L = len(levels)
        if values.shape[0] != 1 << L:
            raise DDError(f"expected {1 << L} values, got {values.shape[0]}")
        leaves = [self.terminal(v) for v in values.tolist()]
        return self._build_bottom_up(leaves, levels)

    def _build_bottom_up(self, layer: list[int], levels: list[int]) -> int:
        for p in range(len(levels) - 1, -1, -1):
            lv = levels[p]
            layer = [self._node(lv, layer[i + 1], layer[i]) for i in range(0, len(layer), 2)]
        return layer[0]

    def from_sparse(self, entries: dict[int, complex], levels: list[int]) -> int:
        """Compile ``{index: value}`` (all other entries zero) into a DD.

        Runs in time linear in ``len(entries) * len(levels)``; the batch is
        split on one variable at a time instead of or-ing single points.
        """
        L = len(levels)
        items = sorted((i, complex(v)) for i, v in entries.items() if v != 0)
        for i, _ in items:
            if not 0 <= i < 1 << L:
                raise DDError(f"index {i} out of range for {L} variables")

        def rec(lo_i, hi_i, p):
            if lo_i == hi_i:
                return self.zero
            if p == L:
                return self.terminal(items[lo_i][1])
            shift = L - 1 - p
            # entries in [lo_i, hi_i) share bits above p; split on bit p
            mid = lo_i
            while mid < hi_i and not (items[mid][0] >> shift) & 1:
                mid += 1
            return self._node(levels[p], rec(mid, hi_i, p + 1), rec(lo_i, mid, p + 1))

        return rec(0, len(items), 0)

    # -- serialization -------------------------------------------------------

    def dumps(self, root: int, kind: str, n_qubits: int) -> str:
        nodes = self.reachable(root)
        terms = [u for u in nodes if self._var[u] == TERMINAL]
        internal = [u for u in nodes if self._var[u] != TERMINAL]
        ids = {u: i for i, u in enumerate(terms + internal)}
        lines = [f"quidd v1 kind={kind} qubits={n_qubits} root={ids[root]}"]
        for u in terms:
            v = self._val[u]
            lines.append(f"T {ids[u]} {v.real:.17g} {v.imag:.17g}")
        for u in internal:
            lines.append(f"N {ids[u]} {VarId.from_level(self._var[u])} "
                         f"{ids[self._hi[u]]} {ids[self._lo[u]]}")
        return "\n".join(lines) + "\n"

    def loads(self, text: str) -> tuple[int, str, int]:
        """Parse :meth:`dumps` output; returns ``(root, kind, n_qubits)``."""
        lines = text.splitlines()
        if not lines:
            raise DDFormatError("empty file", 1)
        header = lines[0].split()
        if header[:2] != ["quidd", "v1"]:
            raise DDFormatError("missing 'quidd v1' header", 1)
        fields = {}
        for tok in header[2:]:
            k, _, v = tok.partition("=")
            fields[k] = v
        try:
            kind = fields["kind"]
            n = int(fields["qubits"])
            root_id = int(fields["root"])
        except (KeyError, ValueError):
            raise DDFormatError("header needs kind=, qubits= and root=", 1) from None
        if kind not in ("state", "operator"):
            raise DDFormatError(f"unknown kind {kind!r}", 1)
        handles: dict[int, int] = {}
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split()
            if not parts:
                continue
            try:
                if parts[0] == "T" and len(parts) == 4:
                    nid = int(parts[1])
                    h = self.terminal(complex(float(parts[2]), float(parts[3])))
                elif parts[0] == "N" and len(parts) == 5:
                    nid = int(parts[1])
                    vk, q = parts[2][0], int(parts[2][1:])
                    if vk not in "RC" or not 0 <= q < n:
                        raise DDFormatError(f"bad variable {parts[2]!r}", lineno)
                    if kind == "state" and vk == "C":
                        raise DDFormatError("column variable in a state", lineno)
                    t, e = int(parts[3]), int(parts[4])
                    if t not in handles or e not in handles:
                        missing = t if t not in handles else e
                        raise DDFormatError(f"dangling node id {missing}", lineno)
                    h = self.ite(VarId(vk, q), handles[t], handles[e])
                else:
                    raise DDFormatError(f"unrecognized line {line!r}", lineno)
            except DDFormatError:
                raise
            except (ValueError, DDError) as exc:
                raise DDFormatError(str(exc), lineno) from None
            if nid in handles:
                raise DDFormatError(f"duplicate node id {nid}", lineno)
            handles[nid] = h
        if root_id not in handles:
            raise DDFormatError(f"dangling root id {root_id}", 1)
        return handles[root_id], kind, n


class DDFormatError(DDError):
    def __init__(self, msg, line):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def unit_modulus(v: complex, eps: float = EPS) -> bool:
    return abs(abs(v) - 1.0) <= eps


def close(a: complex, b: complex, eps: float = EPS) -> bool:
    return abs(a - b) <= eps


def levels_for(n_qubits: int, operator: bool) -> list[int]:
    if operator:
        return list(range(2 * n_qubits))
    return [2 * q for q in range(n_qubits)]
