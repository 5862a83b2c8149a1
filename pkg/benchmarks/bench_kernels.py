"""Time the hot integrators with numba on and off.

Each backend runs in its own interpreter because the switch is read at import:

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, math, sys, time
from pwsmanifold import CartState, CircleProfile, PerturbationSpec, SystemSpec, backend_name, cartesian_flow
from pwsmanifold.simulator import find_fixed_point, reduced_flow

repeat = int(sys.argv[1])
pert = PerturbationSpec(3, {(2, 0, 0): 2 / math.pi, (0, 0, 2): 0.5 / math.pi, (0, 1, 0): -3.0},
                        {(0, 0, 2): 0.5 / math.pi, (0, 0, 0): 8 / math.pi})
spec = SystemSpec(CircleProfile.cos(), pert, 1e-3)

def reduced():
    for k in range(20):
        reduced_flow(spec, 2.0 + 0.1 * k, 0.3)

def fixed_point():
    find_fixed_point(spec, 0.5, 3.5)

def cartesian():
    cartesian_flow(spec, CartState(3.5, 0.0, 0.5), 10 * math.pi)

t0 = time.perf_counter()
reduced(); fixed_point(); cartesian()
warm = time.perf_counter() - t0
out = {"backend": backend_name(), "warmup_s": warm}
for name, fn in (("reduced_flow x20", reduced), ("find_fixed_point", fixed_point), ("cartesian 5 turns", cartesian)):
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter(); fn(); best = min(best, time.perf_counter() - t)
    out[name] = best
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("PWSMANIFOLD_DISABLE_NUMBA", None)
    if disable:
        env["PWSMANIFOLD_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'workload':<20} {fast['backend']:>12} {slow['backend']:>12} {'speedup':>9}")
    for key in fast:
        if key == "backend":
            continue
        a, b = fast[key], slow[key]
        speed = "" if key == "warmup_s" else f"{b / a:8.1f}x"
        print(f"{key:<20} {a:11.4f}s {b:11.4f}s {speed:>9}")


if __name__ == "__main__":
    main()
