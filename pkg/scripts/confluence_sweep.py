"""Tabulate q-log and q-character limits along a spiral q = q0^t as t -> 0."""

import argparse

import numpy as np

from qdeq.confluence import ConfluencePath, limit_qchar, limit_qlog


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--Q", type=complex, default=0.3 + 0.4j)
    ap.add_argument("--mu", type=complex, default=0.5)
    ap.add_argument("--q0", type=float, default=float(np.exp(-1)))
    ap.add_argument("--sign", type=int, choices=(-1, 1), default=1)
    ap.add_argument("--samples", type=int, default=5)
    args = ap.parse_args()

    path = ConfluencePath(args.q0, tuple(np.logspace(-1, -3, args.samples)))
    for label, tr in (("(q-1) ell_q", limit_qlog(args.Q, path, sign=args.sign)),
                      ("e_q(mu)", limit_qchar(args.Q, args.mu, path, sign=args.sign))):
        print(f"{label}: target {complex(tr.target):.10g}, monotone {tr.monotone}")
        for t, v, d in zip(tr.t_values, tr.values, tr.deviations):
            print(f"  t = {t:.2e}  value {complex(v):.10g}  deviation {d:.3e}")


if __name__ == "__main__":
    main()
