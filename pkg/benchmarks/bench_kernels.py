"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeats 5]

Both paths are imported side by side, so the QUIDD_DISABLE_NUMBA flag does
not matter here. Results are checked for agreement before timing.
"""
import argparse
import time

import numpy as np

from quidd import _kernels as K
from quidd.circuits import grover_iter, inverse_qft
from quidd.dd import Manager
from quidd.oracle import dense_build, gate_matrix


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best * 1e3


def expand_case(n):
    mgr = Manager()
    q = inverse_qft(n, mgr)
    levels = q.levels
    positions = {lv: p for p, lv in enumerate(levels)}
    return mgr.flatten(q.root, positions, len(levels)) + (len(levels),)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        print("numba not importable; only the numpy path exists")
        return
    print(f"{'kernel':<28}{'size':>8}{'numpy ms':>12}{'numba ms':>12}{'speedup':>9}")

    for n in (6, 7, 8):
        pos, hi, lo, vals, root, nbits = expand_case(n)
        args_ = (pos, hi, lo, vals, root, nbits)
        a = K.expand_paths_numpy(*args_)
        b = K.expand_paths_numba(*args_)  # also triggers compilation
        assert np.allclose(a, b, atol=1e-12)
        tn = best_of(lambda: K.expand_paths_numpy(*args_), args.repeats)
        tj = best_of(lambda: K.expand_paths_numba(*args_), args.repeats)
        print(f"{'expand_paths (inverse QFT)':<28}{f'n={n}':>8}{tn:12.3f}{tj:12.3f}{tn / tj:9.1f}")

    for n in (8, 10, 12):
        c = grover_iter(n)
        psi = np.zeros((1 << n, 1), dtype=complex)
        psi[int(c.init_bits, 2), 0] = 1
        gates = [(K.prepare_gate(gate_matrix(g)), np.asarray(g.qubits, dtype=np.int64)) for g in c.gates]

        def run_numpy():
            x = psi
            for m, qs in gates:
                x = K.apply_gate_numpy(x, m.dense, list(qs), n)
            return x

        def run_numba():
            x = psi
            for m, qs in gates:
                x = K.apply_gate_numba(x, m, qs, n)
            return x

        assert np.allclose(run_numpy(), run_numba(), atol=1e-12)
        tn = best_of(run_numpy, args.repeats)
        tj = best_of(run_numba, args.repeats)
        print(f"{'apply_gate (Grover circuit)':<28}{f'n={n}':>8}{tn:12.3f}{tj:12.3f}{tn / tj:9.1f}")

    # end to end through the public oracle entry point
    d = dense_build(grover_iter(12))
    assert abs(np.vdot(d, d) - 1) < 1e-9


if __name__ == "__main__":
    main()
