"""The numba kernels and the plain-Python fallback give the same numbers."""
import json
import os
import subprocess
import sys

import pytest

PROBE = r"""
import json, math
from pwsmanifold import CartState, CircleProfile, PerturbationSpec, SystemSpec, backend_name, cartesian_flow, reduced_flow
pert = PerturbationSpec(3, {(2, 0, 0): 2 / math.pi, (0, 0, 2): 0.5 / math.pi, (0, 1, 0): -3.0},
                        {(0, 0, 2): 0.5 / math.pi, (0, 0, 0): 8 / math.pi})
spec = SystemSpec(CircleProfile.cos(), pert, 1e-2)
tr = cartesian_flow(spec, CartState(3.2, 0.0, 0.4), 2 * math.pi)
print(json.dumps({"backend": backend_name(), "reduced": reduced_flow(spec, 3.2, 0.4),
                  "cart": tr.states[-1].tolist(), "events": [e.t for e in tr.events]}))
"""


def run_probe(disable: bool) -> dict:
    env = dict(os.environ)
    env.pop("PWSMANIFOLD_DISABLE_NUMBA", None)
    if disable:
        env["PWSMANIFOLD_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_fallback_matches_compiled():
    pytest.importorskip("numba")
    fast, slow = run_probe(False), run_probe(True)
    assert fast["backend"] == "numba" and slow["backend"] == "python"
    assert slow["reduced"] == pytest.approx(fast["reduced"], abs=1e-13)
    assert slow["cart"] == pytest.approx(fast["cart"], abs=1e-12)
    assert slow["events"] == pytest.approx(fast["events"], abs=1e-12)
