#!/usr/bin/env python3
"""Writes tests/fixtures/laguerre_reference.hpp from exact rational Laguerre sums and 256-bit mpmath exponentials."""

import pathlib
from fractions import Fraction
from math import comb, factorial

import mpmath as mp

mp.mp.prec = 256

SCALED = [
    (k, beta, x)
    for beta in (0, 1)
    for k in (0, 1, 2, 5, 10, 30, 100, 200)
    for x in ("0", "0.001", "0.5", "1", "3.7", "10", "50", "120", "400", "800", "2000")
]

DENSITY = [(n, x) for n in (1, 2, 3, 7, 30, 50, 100) for x in ("0", "1e-5", "0.01", "0.3", "1", "2.5", "3.9", "4.2", "7")]


def laguerre_exact(k, beta, x):
    """L_k^beta(x) as an exact rational; x is a Fraction."""
    return sum(Fraction((-1) ** j * comb(k + beta, k - j), factorial(j)) * x**j for j in range(k + 1))


def to_mpf(q):
    return mp.mpf(q.numerator) / q.denominator


def scaled(k, beta, x):
    x = Fraction(x)
    return mp.exp(-to_mpf(x) / 2) * to_mpf(laguerre_exact(k, beta, x))


def density(n, x):
    y = n * Fraction(x)
    damp = mp.exp(-to_mpf(y))
    return damp * to_mpf(sum(laguerre_exact(k, 0, y) ** 2 for k in range(n)))


def fmt(v):
    # Values below the double range are written as zero.
    if abs(v) < mp.mpf("1e-300"):
        return "0.0"
    return mp.nstr(v, 20, min_fixed=1, max_fixed=0)


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    lines = [
        "#pragma once",
        "",
        "// Generated by tools/gen_laguerre_fixtures.py (exact rational sums, 256-bit mpmath). Do not edit.",
        "",
        "namespace fixtures {",
        "",
        "struct ScaledLaguerreCase {",
        "  int k;",
        "  int beta;",
        "  double x;",
        "  double value;",
        "};",
        "",
        "inline constexpr ScaledLaguerreCase kScaledLaguerre[] = {",
    ]
    for k, beta, x in SCALED:
        lines.append(f"    {{{k}, {beta}, {x}, {fmt(scaled(k, beta, x))}}},")
    lines += [
        "};",
        "",
        "struct DensityCase {",
        "  int n;",
        "  double x;",
        "  double value;",
        "};",
        "",
        "inline constexpr DensityCase kDensity[] = {",
    ]
    for n, x in DENSITY:
        lines.append(f"    {{{n}, {x}, {fmt(density(n, x))}}},")
    lines += ["};", "", "}  // namespace fixtures", ""]
    out = root / "tests" / "fixtures" / "laguerre_reference.hpp"
    out.write_text("\n".join(lines))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
