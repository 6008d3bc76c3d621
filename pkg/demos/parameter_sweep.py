"""Map the effective mode count over the control-parameter plane.

The two dimensionless knobs are the interaction time T_I (film length
over beam velocity, in film-period units) and the beam bandwidth
sigma_e. This script runs a small heatmap of kappa over both, writes the
table as CSV, then reruns the same plan against its checkpoint file to
show that completed points are never recomputed. A short path cut at
fixed sigma_e closes things out.
"""

import os
import time

import numpy as np

from etmsim import (
    GridSpec,
    SweepPlan,
    linear_axis,
    load_checkpoint,
    log_axis,
    run_heatmap,
    run_path_cut,
    write_cut_csv,
    write_heatmap_csv,
)

OUT = os.path.join(os.path.dirname(__file__), "output")


def show_table(plan, rows):
    by_key = {(r.t_i, r.sigma_e): r.kappa for r in rows}
    header = "kappa      " + "".join(f"s={s:<8.3g}" for s in plan.sigma_values)
    print(header)
    for t in plan.t_values:
        cells = "".join(f"{by_key[(t, s)]:<10.5f}" for s in plan.sigma_values)
        print(f"T={t:<8.2g} {cells}")


def main():
    os.makedirs(OUT, exist_ok=True)
    plan = SweepPlan(
        t_values=log_axis(1e-5, 1e-2, 4),
        sigma_values=linear_axis(0.05, 2.0, 3),
        grid=GridSpec(n_points=32, q_points=257),
        tol=0.05,
    )
    checkpoint = os.path.join(OUT, "sweep_checkpoint.jsonl")
    if os.path.exists(checkpoint):
        os.remove(checkpoint)

    t0 = time.perf_counter()
    rows = run_heatmap(plan, checkpoint=checkpoint)
    cold = time.perf_counter() - t0
    print(f"heatmap: {len(rows)} points in {cold:.2f} s (cold)")
    show_table(plan, rows)
    print()

    done = load_checkpoint(checkpoint)
    print(f"checkpoint now holds {len(done)} finished points")
    t0 = time.perf_counter()
    again = run_heatmap(plan, checkpoint=checkpoint)
    warm = time.perf_counter() - t0
    same = all(a == b for a, b in zip(rows, again))
    print(f"rerun from checkpoint: {warm:.3f} s (warm), identical rows: {same}")
    print()

    csv_path = os.path.join(OUT, "heatmap.csv")
    write_heatmap_csv(csv_path, rows)
    print(f"wrote {csv_path}")

    # a cut: hold the beams narrow, walk the interaction time
    cut_plan = SweepPlan(
        path=tuple((t, 0.05) for t in np.geomspace(1e-5, 1e-2, 5)),
        grid=GridSpec(n_points=32, q_points=257),
        tol=0.05,
    )
    cut = run_path_cut(cut_plan)
    print()
    print("cut at sigma_e = 0.05:")
    for row in cut:
        print(f"  [{row.arc_index}] T_I = {row.t_i:.2e}  kappa = {row.kappa:.5f}")
    cut_path = os.path.join(OUT, "cut.csv")
    write_cut_csv(cut_path, cut)
    print(f"wrote {cut_path}")


if __name__ == "__main__":
    main()
