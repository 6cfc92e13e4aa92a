"""Rand index against beta for every criterion x rounding pair on a labeled CSV.

Prints one table per rounding (rows: beta, columns: criterion), the layout
of an RI-versus-beta figure. Use --out to keep the long-form CSV.

    python3 scripts/beta_sweep.py data.csv --label-col 0 --betas 0.25,0.5,1,2,4
"""
import argparse
import csv

from pcut.experiment import CRITERIA, CSV_COLUMNS, ROUNDINGS, ExperimentConfig, execute


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("input")
    ap.add_argument("--label-col", type=int, required=True)
    ap.add_argument("--betas", default="0.25,0.5,1,2,4")
    ap.add_argument("--replicates", type=int, default=50)
    ap.add_argument("--init", default="orthogonal")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--stat", choices=("rand_index", "ri_max", "ri_min"), default="rand_index")
    ap.add_argument("--out", help="long-form CSV of all aggregate rows")
    args = ap.parse_args()
    betas = [float(b) for b in args.betas.split(",")]

    table = {}
    rows = []
    for rounding in ROUNDINGS:
        for criterion in CRITERIA:
            cfg = ExperimentConfig(
                input=args.input,
                label_column=args.label_col,
                criterion=criterion,
                rounding=rounding,
                init=args.init,
                betas=betas,
                replicates=args.replicates,
                seed=args.seed,
                workers=args.workers,
            )
            for agg in execute(cfg).aggregates:
                table[rounding, criterion, agg["beta"]] = agg[args.stat]
                rows.append(agg)

    for rounding in ROUNDINGS:
        print(f"\n{rounding} ({args.stat})")
        print(f"{'beta':>8} " + " ".join(f"{c:>8}" for c in CRITERIA))
        for b in betas:
            print(f"{b:8g} " + " ".join(f"{table[rounding, c, b]:8.4f}" for c in CRITERIA))

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
