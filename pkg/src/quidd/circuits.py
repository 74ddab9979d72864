"""Circuit IR, the text format parser, QuIDD builders and benchmark generators.

Text format, one statement per line, ``#`` starts a comment::

    qubits 3
    init 001            # optional, qubit 0 first
    h 0
    ry 2 0.7853981633974483
    cx 0 1
    ccx 0 1 2
    mcx 0 1 2 3          # controls..., target
    cps 0 1 2

Qubit 0 is the most significant index bit (row variable ``R_0``).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .dd import Manager, gc_paused
from .gates import (
    ALL_KINDS, ROTATIONS, CCX, CPS, CX, Gate, GateError, H, MCX, RY, RZ, X,
)
from .linalg import (
    OPERATOR, QuIDD, basis_state, from_amplitudes, from_dense, identity,
    lift_gate, matmul,
)

MAX_QFT_QUBITS = 10
MAX_MODEXP_QUBITS = 20
#: Compute-cache entries kept while building; larger caches are dropped
#: between gates.
BUILD_CACHE_LIMIT = 2_000_000


class CircuitParseError(ValueError):
    def __init__(self, msg, line, column=1):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.msg = msg
        self.line = line
        self.column = column


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    initial: str | None = None

    def __post_init__(self):
        if self.n_qubits < 1:
            raise GateError("a circuit needs at least one qubit")
        if self.initial is not None:
            if len(self.initial) != self.n_qubits or set(self.initial) - {"0", "1"}:
                raise GateError(f"init must be a {self.n_qubits}-bit string")
        for g in self.gates:
            g.validate(self.n_qubits)

    @property
    def init_bits(self) -> str:
        return self.initial or "0" * self.n_qubits

    def append(self, g: Gate) -> "Circuit":
        g.validate(self.n_qubits)
        self.gates.append(g)
        return self

    def extend(self, gates) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def to_text(self) -> str:
        lines = [f"qubits {self.n_qubits}"]
        if self.initial is not None:
            lines.append(f"init {self.initial}")
        lines.extend(str(g) for g in self.gates)
        return "\n".join(lines) + "\n"


def _col(raw: str, tok_index: int) -> int:
    # 1-based column of the tok_index-th whitespace-separated token
    pos, count = 0, -1
    in_tok = False
    for i, ch in enumerate(raw):
        if not ch.isspace() and not in_tok:
            count += 1
            in_tok = True
            if count == tok_index:
                return i + 1
        elif ch.isspace():
            in_tok = False
        pos = i
    return pos + 2


def parse_circuit(text: str) -> Circuit:
    n = None
    initial = None
    gates: list[Gate] = []
    has_init = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = line.split()
        if not toks:
            continue
        head = toks[0].lower()
        if head == "qubits":
            if n is not None:
                raise CircuitParseError("duplicate 'qubits' line", lineno)
            if len(toks) != 2:
                raise CircuitParseError("expected 'qubits <n>'", lineno)
            try:
                n = int(toks[1])
            except ValueError:
                raise CircuitParseError(f"bad qubit count {toks[1]!r}", lineno, _col(raw, 1)) from None
            if n < 1:
                raise CircuitParseError("qubit count must be positive", lineno, _col(raw, 1))
            continue
        if n is None:
            raise CircuitParseError("'qubits <n>' must come first", lineno)
        if head == "init":
            if has_init or gates:
                raise CircuitParseError("'init' must appear once, before any gate", lineno)
            if len(toks) != 2 or len(toks[1]) != n or set(toks[1]) - {"0", "1"}:
                raise CircuitParseError(f"init needs a {n}-bit string", lineno, _col(raw, 1))
            initial = toks[1]
            has_init = True
            continue
        if head not in ALL_KINDS:
            raise CircuitParseError(f"unknown gate {toks[0]!r}", lineno)
        args = toks[1:]
        theta = None
        if head in ROTATIONS:
            if len(args) != 2:
                raise CircuitParseError(f"{head} expects '<qubit> <theta>'", lineno)
            try:
                theta = float(args[1])
            except ValueError:
                raise CircuitParseError(f"bad angle {args[1]!r}", lineno, _col(raw, 2)) from None
            if not math.isfinite(theta):
                raise CircuitParseError(f"bad angle {args[1]!r}", lineno, _col(raw, 2))
            args = args[:1]
        qubits = []
        for i, a in enumerate(args, start=1):
            try:
                q = int(a)
            except ValueError:
                raise CircuitParseError(f"bad qubit index {a!r}", lineno, _col(raw, i)) from None
            if not 0 <= q < n:
                raise CircuitParseError(f"qubit {q} out of range", lineno, _col(raw, i))
            qubits.append(q)
        try:
            gates.append(Gate(head, tuple(qubits), theta))
        except GateError as exc:
            raise CircuitParseError(str(exc), lineno) from None
    if n is None:
        raise CircuitParseError("missing 'qubits <n>' line", 1)
    return Circuit(n, gates, initial)


def has_init_line(text: str) -> bool:
    return any(l.split("#", 1)[0].split()[:1] == ["init"] for l in text.splitlines())


def _maybe_trim(mgr: Manager):
    if mgr.cache_size > BUILD_CACHE_LIMIT:
        mgr.clear_cache()


def build_state(c: Circuit, mgr: Manager | None = None) -> QuIDD:
    mgr = mgr or Manager()
    psi = basis_state(mgr, c.n_qubits, c.init_bits)
    with gc_paused():
        for g in c.gates:
            psi = matmul(lift_gate(g, c.n_qubits, mgr), psi)
            _maybe_trim(mgr)
    return psi


def build_operator(c: Circuit, mgr: Manager | None = None) -> QuIDD:
    """Product of the lifted gates; later gates multiply on the left."""
    mgr = mgr or Manager()
    u = identity(mgr, c.n_qubits)
    with gc_paused():
        for g in c.gates:
            u = matmul(lift_gate(g, c.n_qubits, mgr), u)
            _maybe_trim(mgr)
    return u


# ---------------------------------------------------------------------------
# benchmark generators
# ---------------------------------------------------------------------------

def _grover_block(d, anc):
    # H . CPS . H on the data register, then the all-ones oracle
    gates = [H(q) for q in d]
    gates.append(CPS(d))
    gates.extend(H(q) for q in d)
    gates.append(MCX(d, anc) if len(d) > 1 else CX(d[0], anc))
    return gates


def grover_iter(n: int, iterations: int = 1) -> Circuit:
    """Grover search on ``n - 1`` data qubits plus one ancilla (last qubit).

    The oracle flips the ancilla when every data qubit is 1, i.e. it marks the
    last database item. Each iteration applies ``H^d . CPS . H^d`` to the data
    register and then the oracle, so the first iteration only imprints the
    oracle's sign and later ones amplify it.
    """
    if n < 2:
        raise GateError("grover_iter needs at least 2 qubits")
    d = list(range(n - 1))
    anc = n - 1
    c = Circuit(n, initial="0" * (n - 1) + "1")
    c.extend(H(q) for q in range(n))
    for _ in range(iterations):
        c.extend(_grover_block(d, anc))
    c.append(H(anc))
    return c


def grover_operator(n: int) -> Circuit:
    """The Grover iteration operator alone (diffusion block, then oracle)."""
    if n < 2:
        raise GateError("grover_operator needs at least 2 qubits")
    c = Circuit(n)
    c.extend(_grover_block(list(range(n - 1)), n - 1))
    return c


def remote_epr(n: int) -> Circuit:
    """EPR pair between qubits 0 and n-1 using nearest-neighbour CNOTs.

    Maps ``|0...0>`` to ``(|00...0> + |10...01>) / sqrt(2)``.
    """
    if n < 2:
        raise GateError("remote_epr needs at least 2 qubits")
    c = Circuit(n, initial="0" * n)
    c.append(H(0))
    c.append(CX(0, 1))
    for k in range(1, n - 1):
        c.append(CX(k, k + 1))
        c.append(CX(k + 1, k))
    return c


def remote_epr_target(n: int, mgr: Manager, phi0: float = 0.345, phi1: float = 0.457) -> QuIDD:
    """``(e^{i phi0}|00...0> + e^{i phi1}|10...01>) / sqrt(2)``."""
    s = math.sqrt(0.5)
    last = (1 << (n - 1)) | 1
    return from_amplitudes(mgr, n, {0: cmath.exp(1j * phi0) * s, last: cmath.exp(1j * phi1) * s})


def remote_epr_phased(n: int, phi0: float = 0.345, phi1: float = 0.457) -> Circuit:
    """Gate-level circuit whose output state is :func:`remote_epr_target`."""
    c = remote_epr(n)
    glob = (phi0 + phi1) / 2
    rel = (phi1 - phi0) / 2
    # X.PHASE.X.PHASE is a global phase; rz then splits it between the branches
    c.extend([Gate("phase", (0,), glob), X(0), Gate("phase", (0,), glob), X(0), RZ(0, rel)])
    return c


def hamiltonian_zz(n: int, dt: float) -> Circuit:
    """exp(-i dt Z...Z) on ``n - 1`` data qubits, parity on the last qubit."""
    if n < 2:
        raise GateError("hamiltonian_zz needs at least 2 qubits")
    anc = n - 1
    c = Circuit(n)
    c.extend(CX(q, anc) for q in range(n - 1))
    c.append(RZ(anc, dt))
    c.extend(CX(q, anc) for q in range(n - 2, -1, -1))
    return c


def margolus() -> Circuit:
    t = 2
    return Circuit(3, [
        RY(t, math.pi / 4), CX(1, t), RY(t, math.pi / 4), CX(0, t),
        RY(t, -math.pi / 4), CX(1, t), RY(t, -math.pi / 4),
    ])


def toffoli() -> Circuit:
    return Circuit(3, [CCX(0, 1, 2)])


def inverse_qft(n: int, mgr: Manager) -> QuIDD:
    """Inverse QFT matrix ``omega^{-jk} / sqrt(2^n)`` compiled into a DD."""
    if not 1 <= n <= MAX_QFT_QUBITS:
        raise GateError(f"inverse_qft supports 1..{MAX_QFT_QUBITS} qubits, got {n}")
    N = 1 << n
    j = np.arange(N)
    phase = np.outer(j, j) % N
    mat = np.exp(-2j * np.pi * phase / N) / math.sqrt(N)
    return from_dense(mgr, mat, OPERATOR)


def modexp_state(N: int, a: int, mgr: Manager, x_bits: int | None = None) -> QuIDD:
    """Uniform superposition of ``|x>|a^x mod N>``.

    Register layout: qubits ``0..x_bits-1`` hold ``x`` and the following
    ``f_bits`` hold ``a^x mod N``; inside each register the first qubit is
    the least significant bit.
    """
    if N < 3 or not 1 < a < N:
        raise GateError("modexp_state needs N >= 3 and 1 < a < N")
    f_bits = (N - 1).bit_length()
    x_bits = f_bits if x_bits is None else x_bits
    n = x_bits + f_bits
    if n > MAX_MODEXP_QUBITS:
        raise GateError(f"modexp_state limited to {MAX_MODEXP_QUBITS} qubits, needs {n}")
    amp = 1 / math.sqrt(1 << x_bits)
    entries = {}
    for x in range(1 << x_bits):
        entries[modexp_index(x, pow(a, x, N), x_bits, f_bits)] = amp
    return from_amplitudes(mgr, n, entries)


def modexp_index(x: int, f: int, x_bits: int, f_bits: int) -> int:
    """Basis index of ``|x>|f>`` in the :func:`modexp_state` layout."""
    n = x_bits + f_bits
    idx = 0
    for b in range(x_bits):
        if (x >> b) & 1:
            idx |= 1 << (n - 1 - b)
    for b in range(f_bits):
        if (f >> b) & 1:
            idx |= 1 << (n - 1 - (x_bits + b))
    return idx


BENCHMARKS = ("grover_iter", "remote_epr", "hamiltonian_zz", "inverse_qft",
              "modexp_state", "margolus", "toffoli")


def benchmark(kind: str, mgr: Manager | None = None, **params):
    """Dispatch to a generator by name; DD-valued kinds need ``mgr``."""
    if kind == "grover_iter":
        return grover_iter(params["n"], params.get("iterations", 1))
    if kind == "remote_epr":
        return remote_epr(params["n"])
    if kind == "hamiltonian_zz":
        return hamiltonian_zz(params["n"], params["dt"])
    if kind == "margolus":
        return margolus()
    if kind == "toffoli":
        return toffoli()
    mgr = mgr or Manager()
    if kind == "inverse_qft":
        return inverse_qft(params["n"], mgr)
    if kind == "modexp_state":
        return modexp_state(params["N"], params["a"], mgr, params.get("x_bits"))
    raise ValueError(f"unknown benchmark {kind!r}; choose from {', '.join(BENCHMARKS)}")


__all__ = [
    "Circuit", "CircuitParseError", "Gate", "parse_circuit", "build_state",
    "build_operator", "benchmark", "grover_iter", "grover_operator", "remote_epr",
    "remote_epr_target", "remote_epr_phased", "hamiltonian_zz", "margolus",
    "toffoli", "inverse_qft", "modexp_state", "modexp_index",
]
