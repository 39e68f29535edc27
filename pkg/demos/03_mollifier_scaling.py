"""Smooth indicator approximations and their derivative-norm growth.

Builds radial bump functions that are exactly 1 inside B(r) and exactly
0 outside B(r + eps), then measures how Sobolev and gradient norms blow
up as the smoothing width eps shrinks.  The fitted growth exponents sit
below the guaranteed eps^-(d + ell) envelope.
"""

import pathlib

import numpy as np

from opentorus import build_mollifier, grad_sup_norm, sobolev_norm, verify_norm_scaling
from opentorus.reports import loglog_figure, save_svg

OUT = pathlib.Path(__file__).with_name("out")
EPS_LADDER = tuple(2.0 ** -j for j in range(4, 10))


def main():
    OUT.mkdir(exist_ok=True)

    print("== the sandwich property ==")
    f = build_mollifier(d=1, r=0.1, eps=0.03125, grid_step=0.03125 / 8)
    rho = [0.0, 0.05, 0.099, 0.1, 0.12, 0.13125, 0.2]
    vals = [f.value_at([p]) for p in rho]
    for p, v in zip(rho, vals):
        region = "plateau" if p <= 0.1 else ("ramp" if p < 0.13125 else "outside")
        print(f"  rho = {p:7.5f}: f = {v:.6f}  ({region})")
    print(f"plateau is exactly 1 and tail exactly 0: "
          f"{vals[0] == 1.0 and vals[-1] == 0.0}")

    print()
    print("== norm growth along an eps ladder ==")
    curves = []
    for d in (1, 2):
        for ell in (1, 2):
            rep = verify_norm_scaling(d, 0.1, ell, EPS_LADDER)
            print(f"d = {d}, ell = {ell}: fitted slope {rep.slope:.3f} "
                  f"<= bound {rep.bound_slope:.1f}, monotone = {rep.monotone}, "
                  f"passed = {rep.passed}")
            curves.append((f"d={d} ell={ell}",
                           [1.0 / e for e in rep.eps_values],
                           list(rep.norms), None))

    fig = loglog_figure(curves, "1/eps", "Sobolev norm",
                        "Derivative norm growth under smoothing")
    path = OUT / "mollifier_norms.svg"
    save_svg(fig, path)
    print(f"wrote {path}")

    print()
    print("== gradient sup norm scales like 1/eps ==")
    for eps in (0.0625, 0.03125, 0.015625):
        g = build_mollifier(1, 0.1, eps, eps / 8)
        print(f"  eps = {eps:.6f}: sup|f'| = {grad_sup_norm(g):9.3f},  "
              f"eps * sup|f'| = {eps * grad_sup_norm(g):.4f}")

    print()
    print("== H^ell norms for one fixed eps ==")
    g = build_mollifier(2, 0.1, 0.03125, 0.03125 / 8)
    for ell in (0, 1, 2):
        print(f"  ell = {ell}: ||f||_H^{ell} = {sobolev_norm(g, ell):.4f}")


if __name__ == "__main__":
    main()
