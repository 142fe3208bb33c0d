"""List the local solution basis of the quintic operator and its residuals."""

import argparse
from fractions import Fraction

from qdeq.algebra import EvalContext
from qdeq.operator import QMonomial, invert_variable, parse_operator, relative_residual
from qdeq.solver import QUINTIC, adams_solve, apply_kgroup, frobenius_solve, quintic_ifunction


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.5)
    ap.add_argument("--order", type=int, default=30)
    args = ap.parse_args()

    op = parse_operator(QUINTIC)
    ctx = EvalContext(args.q)
    res, scales = apply_kgroup(op, quintic_ifunction(args.order, ctx), ctx)
    for b in range(5):
        worst = max(abs(r[b]) / s[b] for r, s in zip(res, scales) if s[b])
        print(f"zero      nilpotent component {b}    residual {worst:.2e}")
    for k in range(20):
        sol = adams_solve(op, 20, 1, ctx.root_of_unity(k, 20), args.order, ctx)
        print(f"zero      Adams  xi = zeta_20^{k:<2d}       residual {relative_residual(op, sol, ctx):.2e}")

    mctx = EvalContext(args.q, backend="mpmath")
    opw = invert_variable(op)
    for l in range(1, 6):
        for m in range(5):
            sol = frobenius_solve(opw, QMonomial(mctx.root_of_unity(m, 5), Fraction(l, 5)), 15, mctx)
            print(f"infinity  root zeta_5^{m} q^({l}/5)         residual {relative_residual(opw, sol, mctx):.2e}")


if __name__ == "__main__":
    main()
