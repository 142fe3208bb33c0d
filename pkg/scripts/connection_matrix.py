"""Print the connection matrix of the Fuchsian 4phi3 case and its decomposition check."""

import argparse
import cmath

from qdeq.algebra import EvalContext
from qdeq.connection import connection_matrix_fuchsian, direct_Xb


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.5)
    ap.add_argument("--radius", type=float, default=0.2)
    ap.add_argument("--angle", type=float, default=0.0, help="arg Q in units of pi")
    args = ap.parse_args()

    ctx = EvalContext(args.q)
    Q = args.radius * cmath.exp(1j * cmath.pi * args.angle)
    cm = connection_matrix_fuchsian(Q, ctx)
    print(f"q = {args.q}, Q = {Q:.6g}")
    for b, row in enumerate(cm.entries):
        print(f"M[{b}] = " + "  ".join(f"{complex(x):+.10e}" for x in row))
    for b, (x, y) in enumerate(zip(direct_Xb(Q, ctx), cm.decompose())):
        print(f"X_{b}: direct {complex(x):.12e}  via matrix {complex(y):.12e}  rel {abs(x - y) / abs(x):.1e}")


if __name__ == "__main__":
    main()
