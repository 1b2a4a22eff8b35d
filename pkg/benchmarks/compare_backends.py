"""Time the hot kernels under the numba backend and the pure-numpy fallback.

Runs each workload in a fresh subprocess per backend (the backend is fixed at
import time by the NLQCORR_DISABLE_NUMBA environment variable) and prints a
speedup table. Compilation cost is excluded by a warmup pass.

Usage: python benchmarks/compare_backends.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def run_workloads(repeat: int) -> dict:
    import numpy as np

    from nlqcorr import dynamics, hamfun, qstate
    from nlqcorr._backend import backend_name

    psi0 = qstate.tilted_pair_state()
    sched = hamfun.SwitchingSchedule((3.5, 8.0), (2, 2))
    comp = hamfun.polchinski_extend(
        [hamfun.quadratic_average(qstate.sigma_z, 8.0),
         hamfun.quadratic_average(qstate.sigma_z, 0.5)],
        (2, 2), sched)
    rng = np.random.default_rng(0)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    hmat = (g + g.conj().T) / 2
    rho0 = np.diag([0.75, 0.25]).astype(complex)
    mats = []
    for _ in range(200):
        g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        mats.append((g + g.conj().T) / 2)

    workloads = {
        "switched RK4, 10k steps": lambda: dynamics.integrate(comp, psi0, 10.0, 1e-3),
        "q-von Neumann (q=0.7), 10k steps": lambda: dynamics.integrate_qvn(
            hmat, rho0, 0.7, 10.0, 1e-3),
        "Jacobi eigh, 200 x 8x8": lambda: [qstate.eigh(m) for m in mats],
    }
    results = {"backend": backend_name(), "timings": {}}
    for name, fn in workloads.items():
        fn()  # warmup (JIT compile on the numba backend)
        best = min(_timed(fn) for _ in range(repeat))
        results["timings"][name] = best
    return results


def _timed(fn) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        print(json.dumps(run_workloads(args.repeat)))
        return 0

    reports = {}
    for label, disable in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, NLQCORR_DISABLE_NUMBA=disable)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker",
             "--repeat", str(args.repeat)],
            env=env, capture_output=True, text=True, check=True)
        reports[label] = json.loads(proc.stdout.strip().splitlines()[-1])
        assert reports[label]["backend"] == label, reports[label]

    width = max(len(k) for k in reports["numba"]["timings"])
    print(f"{'workload':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name in reports["numba"]["timings"]:
        t_nb = reports["numba"]["timings"][name]
        t_np = reports["numpy"]["timings"][name]
        print(f"{name:<{width}}  {t_nb:>9.4f}s  {t_np:>9.4f}s  {t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
