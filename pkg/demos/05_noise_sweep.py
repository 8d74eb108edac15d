"""A small noise sweep: mean identity-switch rate per method and noise level.

The command-line `synth` runs the same thing with more seeds and writes
plot-ready CSV/JSON.
"""

import sys

from nsflow.metrics import sweep_csv
from nsflow.pipeline import SweepConfig, run_sweep

seeds = range(int(sys.argv[1]) if len(sys.argv) > 1 else 5)
cells, rows = run_sweep(SweepConfig(), [0.0, 0.1, 0.2, 0.4], seeds)
print(sweep_csv(rows))

by = {(r.method, r.sigma): r.mean_idsw_norm for r in rows}
for sigma in (0.0, 0.1, 0.2, 0.4):
    bar = lambda x: "#" * int(round(x * 100))
    print(f"sigma {sigma:<4} scalar {bar(by[('scalar', sigma)]):<40} "
          f"vector {bar(by[('vector', sigma)])}")
