"""Generated scenario suites (written to ``suites/`` by ``python -m jamsched.suites``)."""
from __future__ import annotations

import argparse
import os

from .io import dump_json

DIVISIBLE = ([1, 2], [1, 3], [1, 2, 4], [2, 4, 8], [1, 2, 4, 8])


def divisible_suite() -> list[tuple[str, dict]]:
    out = []
    for lens in DIVISIBLE:
        tag = "-".join(map(str, lens))
        H = 250 * len(lens) * max(lens)
        for n, (rate, gap) in enumerate([(1, 3), (2, 5), (3, "3/2"), ("1/2", 10)]):
            adv = {"kind": "stochastic", "rate": rate, "seed": 11 * n + len(lens)}
            if gap is not None:
                adv["mean_gap"] = gap
            out.append((f"stoch-{tag}-{n}.json",
                        {"lengths": lens, "horizon": H, "adversary": adv}))
        for i in range(1, len(lens)):
            out.append((f"driver-{tag}-{i}.json",
                        {"lengths": lens, "horizon": H,
                         "adversary": {"kind": "two-length", "long": i, "short": i - 1}}))
    out.append(("scripted-1-2-4.json", {
        "lengths": [1, 2, 4], "horizon": 24,
        "arrivals": [[0, 2], [0, 0], [1, 1], [1, 1], ["5/2", 0], [6, 2], [9, 0]],
        "errors": ["3/2", 7, 11, "29/2"]}))
    return out


def write_suite(root) -> list[str]:
    d = os.path.join(root, "divisible")
    os.makedirs(d, exist_ok=True)
    paths = []
    for name, doc in divisible_suite():
        p = os.path.join(d, name)
        with open(p, "w") as fh:
            fh.write(dump_json(doc))
        paths.append(p)
    return paths


def main(argv=None):
    ap = argparse.ArgumentParser(description="Write the generated scenario suites.")
    ap.add_argument("root", nargs="?", default="suites")
    args = ap.parse_args(argv)
    for p in write_suite(args.root):
        print(p)


if __name__ == "__main__":
    main()
