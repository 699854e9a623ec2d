"""Sweep the round-length and energy models and write both tables as CSV.

The defaults reproduce the reference deployment sweep (payloads 8 to 64
bytes, 1 to 8 data slots, 1 to 6 hops) used in the repository's docs.
"""

import argparse
import os
import sys

from roundsched.timing import (
    ENERGY_GRID_HEADER,
    ROUND_GRID_HEADER,
    NetworkParams,
    energy_saving_grid,
    round_length_grid,
)


def parse_range(text):
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def main():
    parser = argparse.ArgumentParser(
        description="Tabulate round lengths and energy savings over a parameter sweep"
    )
    parser.add_argument("--hops", default="1:6", help="N or LO:HI (default 1:6)")
    parser.add_argument("--slots", default="1:8", help="N or LO:HI (default 1:8)")
    parser.add_argument("--payloads", default="8:64", help="N or LO:HI (default 8:64)")
    parser.add_argument("--retransmissions", type=int, default=2)
    parser.add_argument("--out-dir", default="grids", help="directory for the CSVs")
    args = parser.parse_args()

    hops = parse_range(args.hops)
    slots = parse_range(args.slots)
    payloads = parse_range(args.payloads)
    os.makedirs(args.out_dir, exist_ok=True)

    base = NetworkParams(
        hops=hops[0],
        slots_per_round=slots[0],
        payload_bytes=payloads[0],
        retransmissions=args.retransmissions,
    )

    round_path = os.path.join(args.out_dir, "round_lengths.csv")
    with open(round_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(ROUND_GRID_HEADER) + "\n")
        n = 0
        for l in payloads:
            for row in round_length_grid(base, hops, slots, l):
                fh.write(",".join(str(x) for x in row) + "\n")
                n += 1
    print(f"{round_path}: {n} rows")

    energy_path = os.path.join(args.out_dir, "energy_savings.csv")
    with open(energy_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(ENERGY_GRID_HEADER) + "\n")
        n = 0
        for h in hops:
            ph = NetworkParams(
                hops=h,
                slots_per_round=base.slots_per_round,
                payload_bytes=base.payload_bytes,
                retransmissions=args.retransmissions,
            )
            for row in energy_saving_grid(ph, payloads, slots):
                fh.write(
                    ",".join(str(x) for x in row[:-1]) + f",{float(row[-1]):.6f}\n"
                )
                n += 1
    print(f"{energy_path}: {n} rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
