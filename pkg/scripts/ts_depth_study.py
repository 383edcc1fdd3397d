"""Dependence of the finite-depth t_s estimate on the check depth."""
import argparse

from expoth.address import estimate_ts, parse_address


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--address", nargs="+", default=["|gen:fiter:2", "|gen:fiter:3", "|gen:thue_morse"])
    ap.add_argument("--depths", type=int, nargs="+", default=[4, 6, 8, 10, 12, 16])
    args = ap.parse_args()

    print("address," + ",".join(f"d{d}" for d in args.depths))
    for lit in args.address:
        addr = parse_address(lit)
        vals = []
        for d in args.depths:
            try:
                vals.append(f"{estimate_ts(addr, depth=d):.6f}")
            except ValueError:
                vals.append("nan")
        print(lit + "," + ",".join(vals))


if __name__ == "__main__":
    main()
