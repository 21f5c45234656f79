#!/usr/bin/env python3
"""Plot total throughput against the sweep variable from a cutesim sweep CSV."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="output of 'cutesim sweep'")
    parser.add_argument("-o", "--out", default="sweep.png", help="image file")
    args = parser.parse_args()

    rows = pd.read_csv(args.csv, dtype={"replication": str})
    means = rows[rows["replication"] == "mean"]
    if means.empty:
        means = rows.groupby(["arm_control", "arm_caching", "sweep_value"],
                             as_index=False)["total_throughput"].mean()

    fig, ax = plt.subplots()
    for (control, caching), arm in means.groupby(["arm_control", "arm_caching"]):
        label = f"control {'on' if control else 'off'}, caching {'on' if caching else 'off'}"
        ax.plot(arm["sweep_value"], arm["total_throughput"], marker="o", label=label)
    ax.set_xlabel(rows["sweep_var"].iloc[0])
    ax.set_ylabel("total throughput")
    ax.set_ylim(bottom=0)
    ax.legend()
    fig.savefig(args.out, dpi=120)


if __name__ == "__main__":
    main()
