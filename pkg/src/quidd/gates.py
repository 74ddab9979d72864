"""Gate intermediate representation and its Kronecker-term expansion."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

SINGLE = ("x", "y", "z", "h")
ROTATIONS = ("ry", "rz", "phase")
CONTROLLED = ("cx", "ccx", "mcx")
ALL_KINDS = SINGLE + ROTATIONS + CONTROLLED + ("cps",)

_R2 = math.sqrt(0.5)  # correctly rounded 1/sqrt(2)

# 2x2 matrices as ((m00, m01), (m10, m11)); rows are output indices
I2 = ((1, 0), (0, 1))
P0 = ((1, 0), (0, 0))
P1 = ((0, 0), (0, 1))
X2 = ((0, 1), (1, 0))
X_MINUS_I = ((-1, 1), (1, -1))


class GateError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """One gate of a circuit.

    ``qubits`` lists controls first and the target last for ``cx``, ``ccx``
    and ``mcx``; ``cps`` acts on all listed qubits symmetrically.
    """

    kind: str
    qubits: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        kind = self.kind
        if kind not in ALL_KINDS:
            raise GateError(f"unknown gate {kind!r}")
        arity = {"cx": 2, "ccx": 3}.get(kind, 1 if kind in SINGLE + ROTATIONS else None)
        if arity is not None and len(self.qubits) != arity:
            raise GateError(f"{kind} takes {arity} qubit(s), got {len(self.qubits)}")
        if kind == "mcx" and len(self.qubits) < 2:
            raise GateError("mcx needs at least one control and a target")
        if kind == "cps" and not self.qubits:
            raise GateError("cps needs at least one qubit")
        if len(set(self.qubits)) != len(self.qubits):
            raise GateError(f"duplicate qubit indices in {kind} {list(self.qubits)}")
        if any(q < 0 for q in self.qubits):
            raise GateError("negative qubit index")
        if kind in ROTATIONS:
            if self.theta is None or not math.isfinite(self.theta):
                raise GateError(f"{kind} needs a finite angle")
        elif self.theta is not None:
            raise GateError(f"{kind} takes no angle")

    def validate(self, n: int):
        for q in self.qubits:
            if q >= n:
                raise GateError(f"qubit {q} out of range")

    def matrix2(self):
        """2x2 matrix of a single-qubit gate."""
        k, t = self.kind, self.theta
        if k == "x":
            return X2
        if k == "y":
            return ((0, -1j), (1j, 0))
        if k == "z":
            return ((1, 0), (0, -1))
        if k == "h":
            return ((_R2, _R2), (_R2, -_R2))
        if k == "ry":
            c, s = math.cos(t / 2), math.sin(t / 2)
            return ((c, -s), (s, c))
        if k == "rz":
            return ((cmath.exp(-1j * t), 0), (0, cmath.exp(1j * t)))
        if k == "phase":
            return ((1, 0), (0, cmath.exp(1j * t)))
        raise GateError(f"{k} is not a single-qubit gate")

    def terms(self) -> list[tuple[complex, dict[int, tuple]]]:
        """Decompose into ``sum coeff * kron(factors)``; absent qubits are I."""
        k, q = self.kind, self.qubits
        if k in SINGLE or k in ROTATIONS:
            return [(1, {q[0]: self.matrix2()})]
        if k == "cx":
            return [(1, {q[0]: P0}), (1, {q[0]: P1, q[1]: X2})]
        if k in ("ccx", "mcx"):
            f = {c: P1 for c in q[:-1]}
            f[q[-1]] = X_MINUS_I
            return [(1, {}), (1, f)]
        if k == "cps":
            # 2|0..0><0..0| - I
            return [(-1, {}), (2, {c: P0 for c in q})]
        raise GateError(k)

    def __str__(self):
        args = " ".join(str(q) for q in self.qubits)
        if self.theta is not None:
            return f"{self.kind} {args} {self.theta!r}"
        return f"{self.kind} {args}"


def X(q): return Gate("x", (q,))
def Y(q): return Gate("y", (q,))
def Z(q): return Gate("z", (q,))
def H(q): return Gate("h", (q,))
def RY(q, theta): return Gate("ry", (q,), float(theta))
def RZ(q, theta): return Gate("rz", (q,), float(theta))
def PHASE(q, theta): return Gate("phase", (q,), float(theta))
def CX(c, t): return Gate("cx", (c, t))
def CCX(c1, c2, t): return Gate("ccx", (c1, c2, t))
def MCX(controls, t): return Gate("mcx", tuple(controls) + (t,))
def CPS(qubits): return Gate("cps", tuple(qubits))
