#!/usr/bin/env python3
import os
import sys

import pandas as pd

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cli.ssi_bench import run_benchmark  # noqa: E402
from errors import InferenceError  # noqa: E402
from models import BENCHMARKS  # noqa: E402
from runtime import Algo  # noqa: E402

STEPS = int(os.environ.get("SSI_REPORT_STEPS", "100"))
PF_PARTICLES = int(os.environ.get("SSI_REPORT_PARTICLES", "100"))

# benchmarks whose symbolic run should never sample
EXACT = {"beta-bernoulli", "kalman1d", "tree", "wheels"}


def report_rows(steps=STEPS, pf_particles=PF_PARTICLES):
    rows = []
    for name, spec in BENCHMARKS.items():
        for algo, n in ((Algo.SSI, 1), (Algo.PF, pf_particles)):
            print(f"Running {name}/{algo.value} with {n} particle(s)…", flush=True)
            try:
                res = run_benchmark(spec, algo, n, steps)
            except InferenceError as e:
                print(f"  ⚠️ Error on {name}/{algo.value}: {e!r}", flush=True)
                continue

            if algo is Algo.PF:
                status = "approx"
            elif name in EXACT:
                status = "exact" if res.draw_total == 0 else "SAMPLED"
            else:
                status = "fallback" if res.draw_total > 0 else "NO-FALLBACK"

            rows.append({
                "model": name,
                "algo": algo.value,
                "particles": n,
                "mse": res.mse,
                "draws": res.draw_total,
                "status": status,
            })
    return rows


if __name__ == "__main__":
    df = pd.DataFrame(report_rows())
    print("\n✅ Results table:\n")
    print(df.to_markdown(index=False))
    print("\n🔢 Summary counts:\n")
    print(df.groupby(["algo", "status"])["model"].count())
