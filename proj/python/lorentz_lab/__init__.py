"""Python access to the Lorentz gas lab.

The heavy lifting happens in the compiled ``_core`` module; this package adds
small conveniences on top of it.
"""

import csv

from ._core import (
    angle,
    event_probability,
    first_sphere_hit,
    middle_samples,
    reflect,
    run_suite,
    sojourn_length,
    suite_help,
    suite_names,
    trajectories,
)

__all__ = [
    "angle",
    "event_probability",
    "first_sphere_hit",
    "middle_samples",
    "reflect",
    "run_suite",
    "sojourn_length",
    "suite_help",
    "suite_names",
    "trajectories",
    "write_table",
]


def write_table(table, path):
    """Write one entry of ``run_suite(...)["tables"]`` as CSV with the lab's schema line."""
    with open(path, "w", newline="") as f:
        f.write("# schema=1\n")
        w = csv.writer(f)
        w.writerow(table["columns"])
        for row in table["rows"]:
            w.writerow([repr(float(x)) for x in row])
