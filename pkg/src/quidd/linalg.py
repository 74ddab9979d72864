"""Linear algebra over QuIDDs: products, adjoints, moduli and gate lifting."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dd import (
    CEIL_MODULUS, CONJ, MODULUS, ADD, TERMINAL, DDError, Manager,
    levels_for, quantize, scalar_div, scalar_mul,
)
from .gates import Gate

STATE = "state"
OPERATOR = "operator"


class ShapeError(DDError):
    pass


@dataclass(frozen=True)
class QuIDD:
    """A rooted diagram tagged as an ``n``-qubit state or operator.

    ``bra`` marks a conjugated state used in row-vector role.
    """

    mgr: Manager
    root: int
    n_qubits: int
    kind: str
    bra: bool = False

    def __post_init__(self):
        if self.kind not in (STATE, OPERATOR):
            raise ShapeError(f"kind must be 'state' or 'operator', got {self.kind!r}")
        if self.kind == STATE and self.root == self.mgr.zero:
            raise ShapeError("the zero vector is not a quantum state")

    @property
    def is_state(self) -> bool:
        return self.kind == STATE

    @property
    def levels(self) -> list[int]:
        return levels_for(self.n_qubits, self.kind == OPERATOR)

    @property
    def node_count(self) -> int:
        return self.mgr.node_count(self.root)

    def stats(self):
        return self.mgr.stats(self.root)

    def with_root(self, root: int, **kw) -> "QuIDD":
        fields = dict(mgr=self.mgr, root=root, n_qubits=self.n_qubits,
                      kind=self.kind, bra=self.bra)
        fields.update(kw)
        return QuIDD(**fields)

    def to_dense(self) -> np.ndarray:
        """Expand into a flat vector or ``2^n x 2^n`` matrix."""
        levels = self.levels
        positions = {lv: p for p, lv in enumerate(levels)}
        nbits = len(levels)
        pos, hi, lo, vals, r = self.mgr.flatten(self.root, positions, nbits)
        flat = _kernels.expand_paths(pos, hi, lo, vals, r, nbits)
        if self.kind == STATE:
            return flat
        n = self.n_qubits
        # index bits are r0 c0 r1 c1 ...; regroup rows before columns
        t = flat.reshape((2,) * (2 * n))
        t = t.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)))
        return t.reshape(1 << n, 1 << n)

    def __repr__(self):
        return (f"QuIDD({self.kind}, n={self.n_qubits}, root={self.root}, "
                f"nodes={self.node_count})")


def _same_manager(a: QuIDD, b: QuIDD):
    if a.mgr is not b.mgr:
        raise ShapeError("operands belong to different managers")
    if a.n_qubits != b.n_qubits:
        raise ShapeError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def identity(mgr: Manager, n: int) -> QuIDD:
    return QuIDD(mgr, mgr.identity_nodes(n)[0], n, OPERATOR)


def basis_state(mgr: Manager, n: int, bits=None) -> QuIDD:
    """``|bits>``; ``bits`` is a string or sequence, qubit 0 first."""
    if bits is None:
        bits = [0] * n
    bits = [int(b) for b in bits]
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ShapeError(f"bad basis bitstring for {n} qubits")
    u = mgr.one
    for q in range(n - 1, -1, -1):
        u = mgr._node(2 * q, u, mgr.zero) if bits[q] else mgr._node(2 * q, mgr.zero, u)
    return QuIDD(mgr, u, n, STATE)


def from_dense(mgr: Manager, array, kind: str | None = None) -> QuIDD:
    a = np.asarray(array, dtype=np.complex128)
    if kind is None:
        kind = STATE if a.ndim == 1 else OPERATOR
    if kind == STATE:
        size = a.shape[0]
        n = size.bit_length() - 1
        if a.ndim != 1 or size != 1 << n:
            raise ShapeError("state length must be a power of two")
        return QuIDD(mgr, mgr.from_function(a, levels_for(n, False)), n, STATE)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError("operator must be a square matrix")
    n = a.shape[0].bit_length() - 1
    if a.shape[0] != 1 << n:
        raise ShapeError("operator dimension must be a power of two")
    # interleave row and column bits: r0 c0 r1 c1 ...
    t = a.reshape((2,) * (2 * n))
    order = [ax for q in range(n) for ax in (q, n + q)]
    flat = t.transpose(order).ravel()
    return QuIDD(mgr, mgr.from_function(flat, levels_for(n, True)), n, OPERATOR)


def from_amplitudes(mgr: Manager, n: int, amps: dict[int, complex]) -> QuIDD:
    """Sparse state constructor; keys are basis indices, qubit 0 most significant."""
    return QuIDD(mgr, mgr.from_sparse(amps, levels_for(n, False)), n, STATE)


# ---------------------------------------------------------------------------
# pointwise maps
# ---------------------------------------------------------------------------

def scalar_ops(a: QuIDD, c: complex, mode: str = "mul") -> QuIDD:
    c = complex(c)
    if mode == "mul":
        if c == 1:
            return a
        op = scalar_mul(c)
    elif mode == "div":
        if c == 0:
            raise ZeroDivisionError("scalar division by zero")
        if c == 1:
            return a
        op = scalar_div(c)
    else:
        raise ValueError(f"mode must be 'mul' or 'div', got {mode!r}")
    return a.with_root(a.mgr.apply_unary(a.root, op))


def modulus_map(a: QuIDD, mode: str = "modulus") -> QuIDD:
    if mode == "modulus":
        op = MODULUS
    elif mode in ("ceil", "ceil_modulus"):
        op = CEIL_MODULUS
    else:
        raise ValueError(f"unknown modulus mode {mode!r}")
    return a.with_root(a.mgr.apply_unary(a.root, op))


def conjugate(a: QuIDD) -> QuIDD:
    return a.with_root(a.mgr.apply_unary(a.root, CONJ))


def _transpose_root(mgr: Manager, root: int, conj: bool) -> int:
    var, val = mgr._var, mgr._val
    cache = mgr._cache
    tag = "ctrans" if conj else "trans"
    node = mgr._node

    def cof4(u, q):
        t, e = mgr.cofactors(u, 2 * q)
        t1, t0 = mgr.cofactors(t, 2 * q + 1)
        e1, e0 = mgr.cofactors(e, 2 * q + 1)
        return e0, e1, t0, t1  # (r,c) = 00, 01, 10, 11

    def rec(u):
        lv = var[u]
        if lv == TERMINAL:
            return mgr.terminal(val[u].conjugate()) if conj else u
        key = (tag, u)
        r = cache.get(key)
        if r is not None:
            return r
        q = lv >> 1
        f00, f01, f10, f11 = cof4(u, q)
        # transposed block (r, c) is the original block (c, r)
        g00, g01, g10, g11 = rec(f00), rec(f10), rec(f01), rec(f11)
        r = node(2 * q, node(2 * q + 1, g11, g10), node(2 * q + 1, g01, g00))
        cache[key] = r
        return r

    return rec(root)


def conj_transpose(a: QuIDD) -> QuIDD:
    """Adjoint. For states this conjugates and flips the ``bra`` flag."""
    if a.kind == STATE:
        return a.with_root(a.mgr.apply_unary(a.root, CONJ), bra=not a.bra)
    return a.with_root(_transpose_root(a.mgr, a.root, conj=True))


def transpose(a: QuIDD) -> QuIDD:
    if a.kind == STATE:
        return a.with_root(a.root, bra=not a.bra)
    return a.with_root(_transpose_root(a.mgr, a.root, conj=False))


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def matmul(a: QuIDD, b: QuIDD) -> QuIDD:
    """Operator-operator or operator-state product by 2x2 block recursion.

    The recursion descends one qubit at a time over the interleaved order.
    When both operands skip a qubit, the summed-out index contributes a
    factor 2 per skipped qubit.
    """
    if a.kind != OPERATOR:
        raise ShapeError("left operand of matmul must be an operator")
    _same_manager(a, b)
    mgr, n = a.mgr, a.n_qubits
    b_op = b.kind == OPERATOR
    var, hi, lo, val = mgr._var, mgr._hi, mgr._lo, mgr._val
    cache = mgr._cache
    zero = mgr.zero
    ident_top = {u: j for j, u in enumerate(mgr.identity_nodes(n))}
    node, apply = mgr._node, mgr.apply
    tag = "mm" if b_op else "mv"
    lim = 2 * n

    def block(x, y, q):
        # rec(x, y) rescaled for the qubits between q and its start
        if x == zero or y == zero:
            return zero
        p = rec(x, y)
        lv = var[x] if var[x] < var[y] else var[y]
        gap = (n if lv >= lim else lv >> 1) - q - 1
        if gap and p != zero:
            p = mgr.apply_unary(p, scalar_mul(float(1 << gap)))
        return p

    def rec(x, y):
        # product over qubits >= min(topq(x), topq(y))
        lx, ly = var[x], var[y]
        tx = n if lx >= lim else lx >> 1
        ty = n if ly >= lim else ly >> 1
        q = tx if tx < ty else ty
        if q == n:
            return mgr.terminal(val[x] * val[y])
        j = ident_top.get(x)
        if j is not None and j <= ty:
            return y
        if b_op:
            j = ident_top.get(y)
            if j is not None and j <= tx:
                return x
        key = (tag, x, y)
        r = cache.get(key)
        if r is not None:
            return r
        R = 2 * q
        C = R + 1
        if lx == R:
            xt, xe = hi[x], lo[x]
        else:
            xt = xe = x
        if var[xt] == C:
            x11, x10 = hi[xt], lo[xt]
        else:
            x11 = x10 = xt
        if var[xe] == C:
            x01, x00 = hi[xe], lo[xe]
        else:
            x01 = x00 = xe
        if ly == R:
            yt, ye = hi[y], lo[y]
        else:
            yt = ye = y
        if b_op:
            if var[yt] == C:
                y11, y10 = hi[yt], lo[yt]
            else:
                y11 = y10 = yt
            if var[ye] == C:
                y01, y00 = hi[ye], lo[ye]
            else:
                y01 = y00 = ye
        if x01 == zero and x10 == zero and x00 == x11:
            # identity on this qubit: each result block is x00 @ (y block)
            if b_op:
                r = node(R, node(C, block(x00, y11, q), block(x00, y10, q)),
                         node(C, block(x00, y01, q), block(x00, y00, q)))
            else:
                r = node(R, block(x00, yt, q), block(x00, ye, q))
            cache[key] = r
            return r
        if b_op:
            o00 = apply(block(x00, y00, q), block(x01, y10, q), ADD)
            o01 = apply(block(x00, y01, q), block(x01, y11, q), ADD)
            o10 = apply(block(x10, y00, q), block(x11, y10, q), ADD)
            o11 = apply(block(x10, y01, q), block(x11, y11, q), ADD)
            r = node(R, node(C, o11, o10), node(C, o01, o00))
        else:
            o0 = apply(block(x00, ye, q), block(x01, yt, q), ADD)
            o1 = apply(block(x10, ye, q), block(x11, yt, q), ADD)
            r = node(R, o1, o0)
        cache[key] = r
        return r

    root = block(a.root, b.root, -1)
    return b.with_root(root, bra=False) if not b_op else a.with_root(root)


def _pow2(x, k: int):
    return complex(math.ldexp(x.real, k), math.ldexp(x.imag, k)) if x else x


def weighted_sum(mgr: Manager, root: int, levels: list[int]) -> complex:
    """Sum of the function over all assignments of ``levels``.

    A reduced diagram omits variables it does not depend on, so a path that
    skips ``k`` levels stands for ``2^k`` equal entries.
    """
    pos = {lv: p for p, lv in enumerate(levels)}
    L = len(levels)
    var, hi, lo, val = mgr._var, mgr._hi, mgr._lo, mgr._val
    memo: dict[int, complex] = {}

    def p_of(u):
        lv = var[u]
        return L if lv == TERMINAL else pos[lv]

    def rec(u):
        if var[u] == TERMINAL:
            return val[u]
        s = memo.get(u)
        if s is None:
            p = pos[var[u]]
            h, l = hi[u], lo[u]
            s = _pow2(rec(h), p_of(h) - p - 1) + _pow2(rec(l), p_of(l) - p - 1)
            memo[u] = s
        return s

    return _pow2(rec(root), p_of(root))


def inner_product(a: QuIDD, b: QuIDD) -> complex:
    """``<a|b>``: pointwise product of ``conj(a)`` and ``b``, then a weighted sum.

    The product is reduced on the fly instead of being materialised, so
    products of tiny amplitudes never have to become terminals. The pair
    recursion is the Apply recursion, memoized on operand pairs.
    """
    if a.kind != STATE or b.kind != STATE:
        raise ShapeError("inner product needs two states")
    _same_manager(a, b)
    mgr = a.mgr
    pos = {lv: p for p, lv in enumerate(a.levels)}
    L = len(pos)
    var, hi, lo, val = mgr._var, mgr._hi, mgr._lo, mgr._val
    conj_a = not a.bra  # a bra already holds conjugated values
    memo: dict[tuple[int, int], complex] = {}

    def p_pair(u, v):
        lu, lv = var[u], var[v]
        top = lu if lu < lv else lv
        return L if top == TERMINAL else pos[top]

    def rec(u, v):
        # sum of conj(a) * b over the variables from the top of (u, v) down
        lu, lv = var[u], var[v]
        if lu == TERMINAL and lv == TERMINAL:
            x = val[u]
            return (x.conjugate() if conj_a else x) * val[v]
        key = (u, v)
        s = memo.get(key)
        if s is not None:
            return s
        top = lu if lu < lv else lv
        p = pos[top]
        uh, ul = (hi[u], lo[u]) if lu == top else (u, u)
        vh, vl = (hi[v], lo[v]) if lv == top else (v, v)
        s = (_pow2(rec(uh, vh), p_pair(uh, vh) - p - 1)
             + _pow2(rec(ul, vl), p_pair(ul, vl) - p - 1))
        memo[key] = s
        return s

    return _pow2(rec(a.root, b.root), p_pair(a.root, b.root))


# ---------------------------------------------------------------------------
# gate lifting
# ---------------------------------------------------------------------------

def _kron_term(mgr: Manager, n: int, coeff: complex, factors: dict[int, tuple]) -> int:
    """Build ``coeff * kron_q factors[q]`` (identity where absent) top-down."""
    if coeff == 0:
        return mgr.zero
    last = max(factors) if factors else -1
    ident = mgr.identity_nodes(n)
    memo: dict = {}
    node = mgr._node

    def rec(q, c):
        if q > last:
            base = ident[q]
            return base if c == 1 else mgr.apply_unary(base, scalar_mul(c))
        key = (q, quantize(c))
        r = memo.get(key)
        if r is not None:
            return r
        m = factors.get(q)
        if m is None:
            sub = rec(q + 1, c)
            r = node(2 * q, node(2 * q + 1, sub, mgr.zero), node(2 * q + 1, mgr.zero, sub))
        else:
            ch = [[mgr.zero if m[i][k] == 0 else rec(q + 1, c * m[i][k]) for k in (0, 1)]
                  for i in (0, 1)]
            r = node(2 * q, node(2 * q + 1, ch[1][1], ch[1][0]),
                     node(2 * q + 1, ch[0][1], ch[0][0]))
        memo[key] = r
        return r

    return rec(0, complex(coeff))


def _local_matrix(g: Gate) -> np.ndarray:
    """Dense ``2^k x 2^k`` matrix of ``g`` on its own qubits (small gates only)."""
    k = len(g.qubits)
    m = np.zeros((1 << k, 1 << k), dtype=np.complex128)
    for coeff, factors in g.terms():
        t = np.ones((1, 1), dtype=np.complex128) * coeff
        for q in g.qubits:
            t = np.kron(t, np.array(factors.get(q, ((1, 0), (0, 1))), dtype=np.complex128))
        m += t
    return m


def _lift_direct(mgr: Manager, n: int, qubits: tuple[int, ...], m: np.ndarray) -> int:
    # top-down over qubits, remembering the local row/col bits seen so far
    where = {q: i for i, q in enumerate(qubits)}
    last = max(qubits)
    k = len(qubits)
    ident = mgr.identity_nodes(n)
    node, zero = mgr._node, mgr.zero
    memo: dict = {}

    def leaf(q, rb, cb):
        v = complex(m[rb, cb])
        if v == 0:
            return zero
        if v == 1:
            return ident[q]
        return mgr.apply_unary(ident[q], scalar_mul(v))

    def rec(q, rb, cb):
        if q > last:
            return leaf(q, rb, cb)
        key = (q, rb, cb)
        r = memo.get(key)
        if r is not None:
            return r
        R, C = 2 * q, 2 * q + 1
        i = where.get(q)
        if i is None:
            sub = rec(q + 1, rb, cb)
            r = node(R, node(C, sub, zero), node(C, zero, sub))
        else:
            bit = 1 << (k - 1 - i)
            ch = [[rec(q + 1, rb | (bit if rr else 0), cb | (bit if cc else 0))
                   for cc in (0, 1)] for rr in (0, 1)]
            r = node(R, node(C, ch[1][1], ch[1][0]), node(C, ch[0][1], ch[0][0]))
        memo[key] = r
        return r

    return rec(0, 0, 0)


#: Gates acting on more qubits than this are lifted term by term.
DIRECT_LIFT_MAX_QUBITS = 4


def lift_gate(g: Gate, n: int, mgr: Manager) -> QuIDD:
    """``n``-qubit operator of ``g`` padded with identities.

    Small gates are compiled in one top-down pass from their local matrix.
    Wider gates (``mcx``, ``cps`` on many qubits) are summed from Kronecker
    terms so no ``2^k`` block is ever formed.
    """
    g.validate(n)
    if len(g.qubits) <= DIRECT_LIFT_MAX_QUBITS:
        return QuIDD(mgr, _lift_direct(mgr, n, g.qubits, _local_matrix(g)), n, OPERATOR)
    root = mgr.zero
    for coeff, factors in g.terms():
        t = _kron_term(mgr, n, coeff, factors)
        root = t if root == mgr.zero else mgr.apply(root, t, ADD)
    return QuIDD(mgr, root, n, OPERATOR)
