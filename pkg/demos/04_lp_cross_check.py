"""Export the mixed-integer program and solve it with an off-the-shelf MILP solver.

The LP file is plain CPLEX LP format, so any MILP solver can read it.  SciPy
ships HiGHS, which is used here to confirm the branch-and-bound optimum.
"""

import sys
import tempfile
from pathlib import Path

from nsflow.bnb import solve
from nsflow.instances import crossing_pair
from nsflow.lp_export import export_lp, parse_lp, solve_with_highs

net = crossing_pair().net
text = export_lp(net)
model = parse_lp(text)
print(f"{len(model.variables)} variables ({len(model.binaries)} binary), "
      f"{len(model.constraints)} rows")
print("\n".join(text.splitlines()[:12]) + "\n...")

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.gettempdir()) / "crossing_pair.lp"
out.write_text(text)
print(f"\nwrote {out}")

highs, values = solve_with_highs(text)
print(f"HiGHS objective          : {highs:.9f}")
print(f"branch and bound         : {solve(net).value:.9f}")
print("active edges:", sorted(v for v, x in values.items() if v.startswith("b_") and x > 0.5))
