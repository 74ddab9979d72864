"""Equivalence checks: exact, up to global phase, and up to relative phase.

Phase orientation: every method reports factors ``P`` with ``A = P * B``
(pointwise for states, ``U = D V`` or ``U = V D`` for operators). A verdict
on ``(A, B)`` therefore carries the phase that maps ``B`` onto ``A``.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

from .dd import (
    EPS, TERMINAL, ZERO_KEY, BinaryOp, Manager, UnaryOp, quantize,
)
from .linalg import (
    OPERATOR, STATE, QuIDD, ShapeError, conj_transpose, identity, inner_product,
    matmul, modulus_map, scalar_ops, transpose,
)


class Outcome(enum.Enum):
    EXACT_EQUAL = "exact-equal"
    GLOBAL_PHASE = "global-phase"
    RELATIVE_PHASE = "relative-phase"
    NOT_EQUIVALENT = "not-equivalent"
    FILTER_PASSED = "filter-passed"
    FILTER_FAILED = "filter-failed"


class Side(enum.Enum):
    LEFT = "left"    # U = D . V
    RIGHT = "right"  # U = V . D
    STATE = "state"  # a = p * b pointwise


EQUIVALENT = (Outcome.EXACT_EQUAL, Outcome.GLOBAL_PHASE, Outcome.RELATIVE_PHASE)


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    method: str
    phase: complex | None = None
    phases: QuIDD | None = None     # relative-phase vector, qubit 0 first
    phase_values: tuple = ()        # distinct factors where they are constrained
    side: Side | None = None
    also_right: bool = False        # left and right diagonals both exist
    stats: dict = field(default_factory=dict)

    @property
    def equivalent(self) -> bool:
        return self.outcome in EQUIVALENT

    @property
    def passed(self) -> bool:
        """True for equivalences and for filters that did not reject."""
        return self.equivalent or self.outcome is Outcome.FILTER_PASSED

    def __str__(self):
        s = f"{self.method}: {self.outcome.value}"
        if self.phase is not None:
            s += f" phase={self.phase:.12g}"
        if self.side is not None:
            s += f" side={self.side.value}"
        return s


class _Fail(Exception):
    """Raised inside Apply callbacks to terminate a check early."""


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def _check_pair(a: QuIDD, b: QuIDD, kind: str | None = None):
    if a.mgr is not b.mgr:
        raise ShapeError("operands belong to different managers")
    if a.kind != b.kind:
        raise ShapeError(f"kind mismatch: {a.kind} vs {b.kind}")
    if kind is not None and a.kind != kind:
        raise ShapeError(f"this method needs {kind}s, got {a.kind}s")
    if a.n_qubits != b.n_qubits:
        raise ShapeError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    if a.bra != b.bra:
        raise ShapeError("cannot compare a bra with a ket")


def _verdict(outcome, method, a, b, t0, **kw) -> Verdict:
    stats = {"nodes_a": a.node_count, "nodes_b": b.node_count,
             "elapsed_ms": (time.perf_counter() - t0) * 1e3}
    stats.update(kw.pop("stats", {}))
    return Verdict(outcome, method, stats=stats, **kw)


def _is_zero(v: complex) -> bool:
    return quantize(v) == ZERO_KEY


def _unit(v: complex) -> bool:
    return abs(abs(v) - 1.0) <= EPS


def _support_values(mgr: Manager, p: int, mask: int) -> tuple:
    """Distinct values of ``p`` where ``mask`` is nonzero."""
    var, val = mgr._var, mgr._val
    seen, out = set(), {}

    def walk(u, m):
        if (u, m) in seen:
            return
        seen.add((u, m))
        if var[m] == TERMINAL and _is_zero(val[m]):
            return
        if var[u] == TERMINAL and var[m] == TERMINAL:
            out.setdefault(quantize(val[u]), val[u])
            return
        top = min(var[u], var[m])
        for x, y in zip(mgr.cofactors(u, top), mgr.cofactors(m, top)):
            walk(x, y)

    walk(p, mask)
    return tuple(sorted(out.values(), key=lambda z: (z.real, z.imag)))


# ---------------------------------------------------------------------------
# exact and global phase
# ---------------------------------------------------------------------------

def exact_equal(a: QuIDD, b: QuIDD) -> Verdict:
    t0 = time.perf_counter()
    _check_pair(a, b)
    if a.root == b.root:
        return _verdict(Outcome.EXACT_EQUAL, "exact", a, b, t0, phase=1 + 0j)
    return _verdict(Outcome.NOT_EQUIVALENT, "exact", a, b, t0)


def node_count_filter(a: QuIDD, b: QuIDD) -> Verdict:
    """Global phase preserves diagram shape, so unequal counts rule it out."""
    t0 = time.perf_counter()
    _check_pair(a, b)
    ok = a.node_count == b.node_count
    return _verdict(Outcome.FILTER_PASSED if ok else Outcome.FILTER_FAILED,
                    "nodecount", a, b, t0)


def global_inner_product(a: QuIDD, b: QuIDD) -> Verdict:
    """Global phase via ``<b|a>``; unit states are parallel iff it has modulus 1."""
    t0 = time.perf_counter()
    _check_pair(a, b, STATE)
    ip = inner_product(b, a)
    # the modulus test alone assumes unit norms; check them rather than trust
    na = inner_product(a, a).real
    nb = inner_product(b, b).real
    ok = abs(na - 1) <= EPS and abs(nb - 1) <= EPS and _unit(ip)
    stats = {"inner_product": ip}
    if ok:
        return _verdict(Outcome.GLOBAL_PHASE, "inner", a, b, t0, phase=ip, stats=stats)
    return _verdict(Outcome.NOT_EQUIVALENT, "inner", a, b, t0, stats=stats)


def _first_unit_terminal(mgr: Manager, root: int):
    for t in mgr.terminals(root):
        v = mgr.value(t)
        if _unit(v):
            return v
    return None


def global_matrix_product(u: QuIDD, v: QuIDD) -> Verdict:
    """``U V^dagger`` must equal ``t I`` for a unit scalar ``t``."""
    t0 = time.perf_counter()
    _check_pair(u, v, OPERATOR)
    mgr = u.mgr
    w = matmul(u, conj_transpose(v))
    t = _first_unit_terminal(mgr, w.root)
    if t is not None:
        if scalar_ops(w, t, "div").root == identity(mgr, u.n_qubits).root:
            return _verdict(Outcome.GLOBAL_PHASE, "matrix", u, v, t0, phase=t,
                            stats={"product_nodes": w.node_count})
    return _verdict(Outcome.NOT_EQUIVALENT, "matrix", u, v, t0,
                    stats={"product_nodes": w.node_count})


class _PhaseAccumulator:
    __slots__ = ("gp", "have_gp", "visits")

    def __init__(self):
        self.gp = None
        self.have_gp = False
        self.visits = 0


def gprc(a: QuIDD, b: QuIDD) -> Verdict:
    """Recursive global-phase check in ``O(|A| + |B|)``.

    Walks both diagrams in lock step; they must be isomorphic with every
    terminal pair related by the same unit factor ``Value(A) / Value(B)``.
    Pairs already shown consistent are memoized, so each is expanded once.
    """
    t0 = time.perf_counter()
    _check_pair(a, b)
    mgr = a.mgr
    var, hi, lo, val = mgr._var, mgr._hi, mgr._lo, mgr._val
    acc = _PhaseAccumulator()
    done: set[tuple[int, int]] = set()

    def rec(x, y):
        if (x, y) in done:
            return True
        acc.visits += 1
        vx, vy = var[x], var[y]
        if vx == TERMINAL and vy == TERMINAL:
            ax, by = val[x], val[y]
            if _is_zero(by):
                ok = _is_zero(ax)
            elif _is_zero(ax):
                ok = False
            else:
                ngp = ax / by
                if not _unit(ngp):
                    ok = False
                elif acc.have_gp:
                    ok = abs(ngp - acc.gp) <= EPS
                else:
                    acc.gp, acc.have_gp = ngp, True
                    ok = True
        elif vx == TERMINAL or vy == TERMINAL or vx != vy:
            ok = False
        else:
            ok = rec(hi[x], hi[y]) and rec(lo[x], lo[y])
        if ok:
            done.add((x, y))
        return ok

    ok = rec(a.root, b.root)
    stats = {"visits": acc.visits}
    if ok and acc.have_gp:
        return _verdict(Outcome.GLOBAL_PHASE, "gprc", a, b, t0, phase=acc.gp, stats=stats)
    if ok:
        # both all-zero operators; only reachable for operators
        return _verdict(Outcome.GLOBAL_PHASE, "gprc", a, b, t0, phase=1 + 0j, stats=stats)
    return _verdict(Outcome.NOT_EQUIVALENT, "gprc", a, b, t0, stats=stats)


# ---------------------------------------------------------------------------
# relative phase
# ---------------------------------------------------------------------------

def rel_mod_inner(a: QuIDD, b: QuIDD) -> Verdict:
    """States with equal moduli differ only by relative phase; no phases returned."""
    t0 = time.perf_counter()
    _check_pair(a, b, STATE)
    g = global_inner_product(modulus_map(a), modulus_map(b))
    stats = {"inner_product": g.stats["inner_product"]}
    if g.equivalent:
        return _verdict(Outcome.RELATIVE_PHASE, "modinner", a, b, t0,
                        side=Side.STATE, stats=stats)
    return _verdict(Outcome.NOT_EQUIVALENT, "modinner", a, b, t0, stats=stats)


def rel_mod_matrix(u: QuIDD, v: QuIDD) -> Verdict:
    """Necessary condition only: ``|U| |V|^T == |V| |V|^T`` entrywise."""
    t0 = time.perf_counter()
    _check_pair(u, v, OPERATOR)
    mu, mv = modulus_map(u), modulus_map(v)
    mvt = transpose(mv)
    ok = matmul(mu, mvt).root == matmul(mv, mvt).root
    return _verdict(Outcome.FILTER_PASSED if ok else Outcome.FILTER_FAILED,
                    "modmatrix", u, v, t0)


def _guarded_div(x, y):
    zx, zy = _is_zero(x), _is_zero(y)
    if zx and zy:
        return 1.0
    if zx or zy:
        raise _Fail
    q = x / y
    if not _unit(q):
        raise _Fail
    return q


GUARDED_DIV = BinaryOp("gdiv", _guarded_div)


def elementwise_div_states(a: QuIDD, b: QuIDD) -> Verdict:
    """Relative phases of two states by guarded pointwise division.

    Entries zero in both states give factor 1; a zero facing a nonzero, or a
    quotient off the unit circle, ends the check at once.
    """
    t0 = time.perf_counter()
    _check_pair(a, b, STATE)
    mgr = a.mgr
    try:
        p = mgr.apply(a.root, b.root, GUARDED_DIV)
    except _Fail:
        return _verdict(Outcome.NOT_EQUIVALENT, "elemdiv", a, b, t0)
    phases = a.with_root(p, bra=False)
    values = _support_values(mgr, p, b.root)
    return _verdict(Outcome.RELATIVE_PHASE, "elemdiv", a, b, t0, phases=phases,
                    phase_values=values, side=Side.STATE,
                    stats={"phase_nodes": phases.node_count})


SENTINEL = 2.0  # out-of-band marker: no quotient of unit states can be 2


def _is_sentinel(v: complex) -> bool:
    return abs(v - SENTINEL) <= EPS


def _rp_merge(x, y):
    # pointwise merge of two phase functions where the sentinel is a wildcard
    if _is_sentinel(x):
        return y
    if _is_sentinel(y) or abs(x - y) <= EPS:
        return x
    raise _Fail


RP_MERGE = BinaryOp("rpmerge", _rp_merge)


def _rp_div(mgr: Manager, ua: int, vb: int, s_parity: int, literal: bool) -> int | None:
    """Pointwise ``U / V`` with variables of parity ``s_parity`` eliminated.

    ``s_parity`` 1 eliminates column variables (phases on the left), 0 row
    variables (phases on the right). Returns the phase root or ``None``.

    With ``literal`` the sentinel handling is the classic one: a sentinel
    child is absorbed by its sibling only directly at an eliminated
    variable and is otherwise replaced by 1 on the spot. The default keeps
    sentinels as wildcards until the end and merges whole sub-functions,
    which also accepts pairs whose zeros sit deeper than one level.
    """
    var, hi, lo, val = mgr._var, mgr._hi, mgr._lo, mgr._val
    zero = mgr.zero
    sent = mgr.terminal(SENTINEL)
    one = mgr.one
    cache: dict[tuple[int, int], int] = {}

    def rec(x, y):
        vx, vy = var[x], var[y]
        if vx == TERMINAL and _is_zero(val[x]):
            if not (vy == TERMINAL and _is_zero(val[y])):
                raise _Fail
            return sent
        if vx == TERMINAL and vy == TERMINAL:
            by = val[y]
            if _is_zero(by):
                raise _Fail  # nonzero over zero; never divide
            q = val[x] / by
            if not _unit(q):
                raise _Fail
            return mgr.terminal(q)
        key = (x, y)
        r = cache.get(key)
        if r is not None:
            return r
        top = vx if vx < vy else vy
        xt, xe = (hi[x], lo[x]) if vx == top else (x, x)
        yt, ye = (hi[y], lo[y]) if vy == top else (y, y)
        t = rec(xt, yt)
        e = rec(xe, ye)
        if (top & 1) == s_parity and t != e:
            if literal:
                if t == sent:
                    r = e
                elif e == sent:
                    r = t
                else:
                    raise _Fail
            else:
                r = mgr.apply(t, e, RP_MERGE)
        else:
            if literal:
                t = one if t == sent else t
                e = one if e == sent else e
            r = mgr._node(top, t, e)
        cache[key] = r
        return r

    try:
        w = rec(ua, vb)
    except _Fail:
        return None
    if w == zero:
        return None
    if sent in mgr.terminals(w):
        w = mgr.apply_unary(w, _SENTINEL_TO_ONE)
    if any((lv & 1) == s_parity for lv in mgr.support_levels(w)):
        return None
    return w


_SENTINEL_TO_ONE = UnaryOp("sent->1", lambda x: 1.0 if _is_sentinel(x) else x)


def _as_phase_vector(mgr: Manager, w: int, n: int, parity: int) -> QuIDD:
    """Relabel a diagram over only rows or only columns as a state vector."""
    if parity == 0:
        return QuIDD(mgr, w, n, STATE)
    var, hi, lo = mgr._var, mgr._hi, mgr._lo
    memo: dict[int, int] = {}

    def rec(u):
        if var[u] == TERMINAL:
            return u
        r = memo.get(u)
        if r is None:
            r = mgr._node(var[u] - 1, rec(hi[u]), rec(lo[u]))
            memo[u] = r
        return r

    return QuIDD(mgr, rec(w), n, STATE)


def rp_div_operators(u: QuIDD, v: QuIDD, literal: bool = False) -> Verdict:
    """One-sided diagonal relative phase between two operators.

    Tries ``U = D V`` (column variables eliminated) and ``U = V D`` (row
    variables eliminated). Left wins when both hold; ``also_right`` records
    that the right form exists too.
    """
    t0 = time.perf_counter()
    _check_pair(u, v, OPERATOR)
    mgr = u.mgr
    left = _rp_div(mgr, u.root, v.root, 1, literal)
    right = _rp_div(mgr, u.root, v.root, 0, literal)
    method = "rpdiv-literal" if literal else "rpdiv"
    for w, side, parity in ((left, Side.LEFT, 1), (right, Side.RIGHT, 0)):
        if w is None:
            continue
        phases = _as_phase_vector(mgr, w, u.n_qubits, 1 - parity)
        values = tuple(sorted({quantize(mgr.value(t)): mgr.value(t)
                               for t in mgr.terminals(phases.root)}.values(),
                              key=lambda z: (z.real, z.imag)))
        return _verdict(Outcome.RELATIVE_PHASE, method, u, v, t0, phases=phases,
                        phase_values=values, side=side,
                        also_right=side is Side.LEFT and right is not None,
                        stats={"phase_nodes": phases.node_count})
    return _verdict(Outcome.NOT_EQUIVALENT, method, u, v, t0)


def non_zero_terminal_merge(a: QuIDD, b: QuIDD) -> Verdict:
    """Necessary condition: zero entries must coincide."""
    t0 = time.perf_counter()
    _check_pair(a, b)
    ok = modulus_map(a, "ceil").root == modulus_map(b, "ceil").root
    return _verdict(Outcome.FILTER_PASSED if ok else Outcome.FILTER_FAILED,
                    "merge", a, b, t0)


def mod_dd_compare(a: QuIDD, b: QuIDD) -> Verdict:
    """Compare modulus diagrams by root.

    Decides relative-phase equivalence for states. For operators equal
    moduli do not force one-sided diagonal phases, so it is only a filter.
    """
    t0 = time.perf_counter()
    _check_pair(a, b)
    ok = modulus_map(a).root == modulus_map(b).root
    if a.kind == STATE:
        if ok:
            return _verdict(Outcome.RELATIVE_PHASE, "moddd", a, b, t0, side=Side.STATE)
        return _verdict(Outcome.NOT_EQUIVALENT, "moddd", a, b, t0)
    return _verdict(Outcome.FILTER_PASSED if ok else Outcome.FILTER_FAILED,
                    "moddd", a, b, t0)


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

LEVELS = ("exact", "global", "relative")


def auto_check(a: QuIDD, b: QuIDD, level: str = "global") -> Verdict:
    """Exact test, then a cheap filter, then the decisive method for ``level``.

    Filters can only short-circuit to not-equivalent; ``stats['skipped']``
    names the decisive method when that happens.
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    t0 = time.perf_counter()
    _check_pair(a, b)
    ran = []

    def finish(v: Verdict, skipped=()):
        stats = dict(v.stats)
        stats.update(pipeline=ran, skipped=list(skipped),
                     elapsed_ms=(time.perf_counter() - t0) * 1e3)
        return Verdict(v.outcome, v.method, v.phase, v.phases, v.phase_values,
                       v.side, v.also_right, stats)

    v = exact_equal(a, b)
    ran.append(v.method)
    if v.equivalent or level == "exact":
        return finish(v)

    if level == "global":
        decisive = "gprc"
        f = node_count_filter(a, b)
    else:
        decisive = "elemdiv" if a.kind == STATE else "rpdiv"
        f = non_zero_terminal_merge(a, b)
    ran.append(f.method)
    if not f.passed:
        nv = Verdict(Outcome.NOT_EQUIVALENT, f.method, stats=f.stats)
        return finish(nv, skipped=[decisive])

    if decisive == "gprc":
        v = gprc(a, b)
    elif decisive == "elemdiv":
        v = elementwise_div_states(a, b)
    else:
        v = rp_div_operators(a, b)
    ran.append(v.method)
    return finish(v)


METHODS = {
    "exact": exact_equal,
    "nodecount": node_count_filter,
    "inner": global_inner_product,
    "matrix": global_matrix_product,
    "gprc": gprc,
    "modinner": rel_mod_inner,
    "modmatrix": rel_mod_matrix,
    "elemdiv": elementwise_div_states,
    "rpdiv": rp_div_operators,
    "merge": non_zero_terminal_merge,
    "moddd": mod_dd_compare,
}
