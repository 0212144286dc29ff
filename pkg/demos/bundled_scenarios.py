"""Run two bundled scenarios end to end and print their summaries.

The same work is done by ``ghcollapse verify <name>``; this shows the
library route and the per-cell rows behind the summary.
"""
from collections import Counter

from ghcollapse.runner import Scenario, run_scenario

for name in ("torus_to_circle", "klein_to_segment"):
    rep = run_scenario(Scenario.load(name), fields=[2, 3])
    print(rep.summary())
    print("  status counts:", dict(Counter(r.status for r in rep.rows)))
    print("  first rows:")
    for line in rep.csv().splitlines()[:4]:
        print("   ", line)
