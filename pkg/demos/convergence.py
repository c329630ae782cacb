"""Grid convergence of both schemes on the Sod problem.

Halving the cell size should shrink the L1 density error with an
observed order between one half and one (first-order upwind transport
with shocks and a contact).
"""

import numpy as np

import stagfv as sf

CONFIG = """
[problem]
preset = sod
[grid]
n_cells = {n}
[scheme]
scheme = {scheme}
cfl_fraction = 0.5
end_time = 0.2
"""

grids = (50, 100, 200, 400)
print(f"{'scheme':22s} " + "  ".join(f"n={n:<6d}" for n in grids) + " orders")
for scheme in ("explicit", "pressure_correction"):
    errors = []
    for n in grids:
        report = sf.run_case(sf.parse_config(CONFIG.format(n=n, scheme=scheme)))
        errors.append(report.l1_error)
    orders = [np.log2(a / b) for a, b in zip(errors, errors[1:])]
    row = "  ".join(f"{e:.3e}" for e in errors)
    print(f"{scheme:22s} {row}  " + ", ".join(f"{o:.2f}" for o in orders))

print("\nMUSCL reconstruction sharpens the contact:")
for reconstruction in ("upwind", "muscl"):
    cfg_text = CONFIG.format(n=200, scheme="pressure_correction").replace(
        "cfl_fraction = 0.5", f"cfl_fraction = 0.5\nreconstruction = {reconstruction}"
    )
    report = sf.run_case(sf.parse_config(cfg_text))
    print(f"  {reconstruction:8s} L1 error {report.l1_error:.4e}")
