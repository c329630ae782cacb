"""Exact Riemann solutions of the registered presets.

Solves the star region for each preset, prints the wave pattern, and
checks the jump conditions across the shocks.
"""

import numpy as np

import stagfv as sf

for name, preset in sf.PRESETS.items():
    sol = sf.solve_star(preset.left, preset.right, preset.gamma)
    speeds = sol.wave_speeds()
    print(f"{name}:")
    print(f"  left  state  rho={preset.left[0]:<10g} u={preset.left[1]:<10g} p={preset.left[2]:<10g}")
    print(f"  right state  rho={preset.right[0]:<10g} u={preset.right[1]:<10g} p={preset.right[2]:<10g}")
    print(f"  p* = {sol.p_star:.6g}   u* = {sol.u_star:.6g}")
    print(f"  waves: {sol.left_wave} | contact | {sol.right_wave}")
    for key, value in speeds.items():
        print(f"    {key:12s} speed {value: .5f}")
    if sol.left_wave == "shock":
        res = sf.rankine_hugoniot_residual(
            preset.left, (sol.rho_star_l, sol.u_star, sol.p_star),
            speeds["left_shock"], preset.gamma,
        )
        print(f"  left shock jump-condition residual:  {np.max(np.abs(res)): .2e}")
    if sol.right_wave == "shock":
        res = sf.rankine_hugoniot_residual(
            (sol.rho_star_r, sol.u_star, sol.p_star), preset.right,
            speeds["right_shock"], preset.gamma,
        )
        print(f"  right shock jump-condition residual: {np.max(np.abs(res)): .2e}")
    # a few profile samples at the preset output time
    x = np.linspace(0.05, 0.95, 7)
    rho, u, p = sf.sample_profile(sol, x, preset.t_end, preset.x0)
    print(f"  profile at t={preset.t_end}:")
    for xi, ri, ui, pi in zip(x, rho, u, p):
        print(f"    x={xi:.2f}  rho={ri:9.4f}  u={ui:9.4f}  p={pi:10.4f}")
    print()
