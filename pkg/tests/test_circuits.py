import math

import numpy as np
import pytest

from quidd import circuits as C
from quidd.dd import Manager
from quidd.gates import CX, H, Gate, GateError
from quidd.linalg import from_dense, identity
from quidd.oracle import dense_build

S2 = math.sqrt(0.5)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
# frozen from the dense oracle
MODEXP_15_7 = [8, 24, 40, 56, 66, 82, 98, 114, 142, 158, 174, 190, 203, 219, 235, 251]
GROVER_NODES = {8: 12, 16: 20, 24: 28, 32: 36}


@pytest.fixture
def mgr():
    return Manager()


class TestParser:
    def test_bell(self):
        c = C.parse_circuit("qubits 2\nh 0\ncx 0 1")
        assert c.n_qubits == 2 and c.gates == [H(0), CX(0, 1)]
        assert c.initial is None

    def test_rotation_angle(self):
        c = C.parse_circuit("qubits 1\nry 0 0.7853981633974483")
        assert c.gates[0] == Gate("ry", (0,), math.pi / 4)

    def test_comments_and_init(self):
        text = "# header\nqubits 3   # three\ninit 101\n\nmcx 0 1 2\ncps 0 2\n"
        c = C.parse_circuit(text)
        assert c.initial == "101" and len(c.gates) == 2
        assert C.has_init_line(text) and not C.has_init_line("qubits 1\nh 0\n# init 0\n")

    def test_round_trip_text(self):
        c = C.margolus()
        assert C.parse_circuit(c.to_text()).gates == c.gates

    @pytest.mark.parametrize("text, line, col, fragment", [
        ("qubits 2\ncx 0 5", 2, 6, "qubit 5 out of range"),
        ("qubits 2\nfoo 0", 2, 1, "unknown gate"),
        ("qubits 1\nry 0 abc", 2, 6, "bad angle"),
        ("qubits 1\nrz 0 inf", 2, 6, "bad angle"),
        ("qubits 1\nh x", 2, 3, "bad qubit index"),
        ("h 0", 1, 1, "must come first"),
        ("# nothing", 1, 1, "missing"),
        ("qubits 0", 1, 8, "positive"),
        ("qubits 2\nqubits 2", 2, 1, "duplicate"),
        ("qubits 2\nh 0\ninit 00", 3, 1, "before any gate"),
        ("qubits 2\ninit 0", 2, 6, "2-bit"),
        ("qubits 2\ncx 1 1", 2, 1, "duplicate qubit"),
        ("qubits 2\nh 0 1", 2, 1, "takes 1 qubit"),
        ("qubits 2\nry 0", 2, 1, "expects"),
    ])
    def test_errors(self, text, line, col, fragment):
        with pytest.raises(C.CircuitParseError) as exc:
            C.parse_circuit(text)
        assert exc.value.line == line and exc.value.column == col
        assert fragment in str(exc.value)


class TestBuild:
    def test_empty_state(self, mgr):
        s = C.build_state(C.Circuit(2, initial="00"), mgr)
        # one path: two internal nodes plus the 1 and 0 terminals
        assert s.node_count == 4 and np.array_equal(s.to_dense(), [1, 0, 0, 0])

    def test_h_h_on_01(self, mgr):
        s = C.build_state(C.Circuit(2, [H(0), H(1)], initial="01"), mgr)
        d = s.to_dense()
        # alternating signs, scaled down by the extra Hadamard
        assert np.allclose(d, np.array([0.707107, -0.707107, 0.707107, -0.707107]) / math.sqrt(2),
                           atol=1e-6)
        assert s.node_count == 3

    def test_remote_epr_4(self, mgr):
        s = C.build_state(C.remote_epr(4), mgr).to_dense()
        assert np.flatnonzero(np.abs(s) > 1e-12).tolist() == [0, 9]
        assert np.max(np.abs(s - dense_build(C.remote_epr(4)))) < 1e-12

    def test_cnot(self, mgr):
        assert C.build_operator(C.Circuit(2, [CX(0, 1)]), mgr).root == from_dense(mgr, CNOT).root

    def test_empty_operator(self, mgr):
        assert C.build_operator(C.Circuit(3), mgr).root == identity(mgr, 3).root

    def test_margolus_moduli(self, mgr):
        m = C.build_operator(C.margolus(), mgr).to_dense()
        t = C.build_operator(C.toffoli(), mgr).to_dense()
        assert np.allclose(np.abs(m), np.abs(t), atol=1e-12)
        assert np.allclose(m, dense_build(C.margolus(), True), atol=1e-12)

    def test_circuit_validation(self):
        with pytest.raises(GateError):
            C.Circuit(0)
        with pytest.raises(GateError):
            C.Circuit(2, initial="012")
        with pytest.raises(GateError):
            C.Circuit(2, [CX(0, 2)])
        with pytest.raises(GateError):
            C.Circuit(2).append(H(4))


class TestGenerators:
    def test_grover_marks_last_item(self):
        d = dense_build(C.grover_iter(5, 2))
        data = d.reshape(16, 2)
        # the ancilla ends in |1>; amplitude sits on the data register
        assert np.allclose(data[:, 0], 0, atol=1e-12)
        amp = data[:, 1]
        marked = abs(amp[15])
        assert marked > 0.6 and np.allclose(np.abs(amp[:15]), np.abs(amp[0]))
        assert marked > 3 * abs(amp[0])

    def test_grover_first_iteration_marks_sign(self):
        amp = dense_build(C.grover_iter(5)).reshape(16, 2)[:, 1]
        assert np.allclose(np.abs(amp), 0.25) and amp[15] * amp[0] < 0

    def test_grover_node_counts(self, mgr):
        for n, count in GROVER_NODES.items():
            assert C.build_state(C.grover_iter(n), Manager()).node_count == count

    def test_grover_matches_oracle(self, mgr):
        c = C.grover_iter(7, 3)
        assert np.max(np.abs(C.build_state(c, mgr).to_dense() - dense_build(c))) < 1e-12

    def test_grover_operator_matches_oracle(self, mgr):
        c = C.grover_operator(5)
        assert np.max(np.abs(C.build_operator(c, mgr).to_dense() - dense_build(c, True))) < 1e-12

    def test_epr_phased(self, mgr):
        n = 5
        built = C.build_state(C.remote_epr_phased(n), mgr)
        assert built.root == C.remote_epr_target(n, mgr).root

    def test_hamiltonian_diagonal(self, mgr):
        u = C.build_operator(C.hamiltonian_zz(4, 0.3), mgr).to_dense()
        d = np.diag(u)
        assert np.allclose(u, np.diag(d), atol=1e-12)
        # the ancilla ends up holding its own bit xor the data parity
        parity = [bin(i).count("1") % 2 for i in range(16)]
        expect = [np.exp(1j * 0.3) if p else np.exp(-1j * 0.3) for p in parity]
        assert np.allclose(d, expect, atol=1e-12)

    def test_inverse_qft(self, mgr):
        q = C.inverse_qft(3, mgr).to_dense()
        N = 8
        j = np.arange(N)
        assert np.allclose(q, np.exp(-2j * np.pi * np.outer(j, j) / N) / math.sqrt(N))
        with pytest.raises(GateError):
            C.inverse_qft(C.MAX_QFT_QUBITS + 1, mgr)

    def test_modexp(self, mgr):
        s = C.modexp_state(15, 7, mgr).to_dense()
        nz = np.flatnonzero(np.abs(s) > 1e-12)
        assert nz.tolist() == MODEXP_15_7
        assert np.allclose(np.abs(s[nz]), 0.25)
        with pytest.raises(GateError):
            C.modexp_state(15, 16, mgr)
        with pytest.raises(GateError):
            C.modexp_state(2 ** 15, 3, mgr)

    def test_modexp_index(self):
        # x = 1 in a 4-bit register is qubit 0; f = 7 sets qubits 4, 5, 6
        assert C.modexp_index(1, 7, 4, 4) == (1 << 7) | (1 << 3) | (1 << 2) | (1 << 1)

    def test_benchmark_dispatch(self, mgr):
        assert C.benchmark("toffoli").gates == C.toffoli().gates
        assert C.benchmark("remote_epr", n=3).n_qubits == 3
        assert C.benchmark("inverse_qft", mgr, n=2).n_qubits == 2
        assert C.benchmark("modexp_state", mgr, N=15, a=7).n_qubits == 8
        with pytest.raises(ValueError):
            C.benchmark("nope")

    @pytest.mark.parametrize("fn", [C.grover_iter, C.grover_operator, C.remote_epr])
    def test_too_small(self, fn):
        with pytest.raises(GateError):
            fn(1)
