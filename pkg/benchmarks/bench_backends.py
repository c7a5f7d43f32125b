"""Compare the numba kernels against the pure-numpy fallback.

The backend is frozen when catforge is imported, so each lane runs in a child
process with CATFORGE_BACKEND set explicitly.  Each timing is the best of
--repeat runs after one warmup call; for the numba lane the warmup also
absorbs JIT compilation.

    python3 benchmarks/bench_backends.py --slices 20000 --cutoff 24
"""

import argparse
import json
import os
import subprocess
import sys

_CHILD = r"""
import json, sys, time
import catforge as cf

repeat, n_slices, cutoff = int(sys.argv[1]), int(sys.argv[2]), int(sys.argv[3])
alpha, big_gamma, tau = 1.5, 1.0, 0.2

config = cf.ChannelConfig(channels=(
    cf.Channel(mode=0, qubit="H", chi=big_gamma, gamma=1.0, duration=tau),
    cf.Channel(mode=1, qubit="V", chi=big_gamma, gamma=1.0, duration=tau),
))
state = cf.xpm_input_state(alpha)
rho0 = cf.xpm_input_density(alpha, (cutoff, cutoff))


def best(fn):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


print(json.dumps({
    "backend": cf.BACKEND_NAME,
    "using_numba": cf.USING_NUMBA,
    "evolve_sliced_s": best(lambda: cf.evolve_sliced(state, config, n_slices)),
    "fock_integrate_s": best(lambda: cf.integrate(rho0, config, tau)),
}))
"""


def measure(backend: str, repeat: int, slices: int, cutoff: int) -> dict:
    env = dict(os.environ, CATFORGE_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", _CHILD, str(repeat), str(slices), str(cutoff)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--slices", type=int, default=20000)
    parser.add_argument("--cutoff", type=int, default=24)
    args = parser.parse_args()

    rows = [measure(b, args.repeat, args.slices, args.cutoff)
            for b in ("numpy", "numba")]
    for row in rows:
        print(f"{row['backend']:>6}:  evolve_sliced {row['evolve_sliced_s'] * 1e3:9.2f} ms"
              f"   fock integrate {row['fock_integrate_s'] * 1e3:9.2f} ms")
    plain, jitted = rows
    if not jitted["using_numba"]:
        print("numba lane fell back to numpy; no speedup to report")
        return
    for key, label in (("evolve_sliced_s", "evolve_sliced"),
                       ("fock_integrate_s", "fock integrate")):
        print(f"speedup {label}: {plain[key] / jitted[key]:.2f}x")


if __name__ == "__main__":
    main()
