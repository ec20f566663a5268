"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--steps 20000] [--points 200000]
"""

import argparse
import time

import numpy as np

from dsmbayes import _fallback

try:
    from dsmbayes import _core
except ImportError:
    _core = None


def best_of(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def chain_inputs(steps, dim=25, seed=0):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(1040, dim)) + 1j * rng.normal(size=(1040, dim))
    u = f @ rng.normal(size=dim)
    gram = np.ascontiguousarray((f.conj().T @ f).real)
    rhs = np.ascontiguousarray((f.conj().T @ u).real)
    data_sq = float(np.vdot(u, u).real)
    return gram, rhs, data_sq, rng.standard_normal((steps, dim)), rng.random(steps)


def run_segment(mod, gram, rhs, data_sq, normals, uniforms):
    dim = len(rhs)
    state = np.zeros(dim)
    out = np.empty((len(uniforms), dim))
    scale2 = 1.0 / (2 * 0.04**2)
    return mod.pcn_segment(gram, rhs, data_sq, scale2, state, scale2 * data_sq, 1e-3,
                           np.ones(dim), normals, uniforms, 0, 0, 1, out, 0)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--points", type=int, default=200_000)
    args = parser.parse_args()

    backends = [("python", _fallback)] + ([("cython", _core)] if _core else [])
    y = np.linspace(0.0, 40.0, args.points)
    inputs = chain_inputs(args.steps)
    rows = []
    for name, mod in backends:
        t_bessel = best_of(lambda: [mod.bessel_j_array(n, y) for n in (0, 1, 2)])
        t_chain = best_of(lambda: run_segment(mod, *inputs), repeat=1 if name == "python" else 3)
        rows.append((name, t_bessel, t_chain))

    print(f"{'backend':<8} {'bessel J0..J2':>14} {'pCN steps':>12} {'us/step':>9}")
    for name, tb, tc in rows:
        print(f"{name:<8} {tb:>13.3f}s {tc:>11.3f}s {1e6 * tc / args.steps:>9.2f}")
    if len(rows) == 2:
        print(f"speed-up: bessel x{rows[0][1] / rows[1][1]:.1f}, chain x{rows[0][2] / rows[1][2]:.1f}")
    if _core is None:
        print("compiled core not available; only the fallback was timed")


if __name__ == "__main__":
    main()
