#!/usr/bin/env python3
"""Derive the fully symmetric simplex quadrature tables embedded in src/quadrature.cpp.

The triangle rule is the 16-point degree-8 Dunavant rule, polished to 30 digits
from its published 15-digit values. The tetrahedron rule is a 35-point,
positive-weight, interior, fully symmetric degree-7 rule with orbit structure
S4 + S31 + S22 + 2*S211; it is solved from random starts and then polished.
The 1D rule is 6-point Gauss-Legendre mapped to [0, 1].

Weights are normalised so that they sum to the reference-element measure.

Usage: python3 scripts/derive_quadrature.py [--seed N]
"""
import argparse
import itertools
import math

import mpmath as mp
import numpy as np
from scipy.optimize import least_squares

mp.mp.dps = 40


def monomials(dim, degree):
    return [e for e in itertools.product(range(degree + 1), repeat=dim) if sum(e) <= degree]


def exact_moment(exps):
    # integral of prod x_i^{a_i} over the unit simplex: prod a_i! / (sum a_i + dim)!
    num = 1
    for a in exps:
        num *= math.factorial(a)
    return mp.mpf(num) / math.factorial(sum(exps) + len(exps))


def unique_perms(bary):
    return sorted(set(itertools.permutations(bary)))


# ---------------------------------------------------------------- orbits
def tri_orbits(kind, params):
    if kind == "S3":
        return [(mp.mpf(1) / 3,) * 3]
    if kind == "S21":
        a = params[0]
        return unique_perms((a, a, 1 - 2 * a))
    if kind == "S111":
        a, b = params
        return unique_perms((a, b, 1 - a - b))
    raise ValueError(kind)


def tet_orbits(kind, params):
    if kind == "S4":
        return [(mp.mpf(1) / 4,) * 4]
    if kind == "S31":
        a = params[0]
        return unique_perms((a, a, a, 1 - 3 * a))
    if kind == "S22":
        a = params[0]
        return unique_perms((a, a, mp.mpf(1) / 2 - a, mp.mpf(1) / 2 - a))
    if kind == "S211":
        a, b = params
        return unique_perms((a, a, b, 1 - 2 * a - b))
    raise ValueError(kind)


NPARAM = {"S3": 0, "S21": 1, "S111": 2, "S4": 0, "S31": 1, "S22": 1, "S211": 2}


def expand(structure, orbit_fn, unknowns):
    """unknowns: per orbit [w, params...] flattened. Returns (points, weights) in barycentric."""
    pts, wts = [], []
    k = 0
    for kind in structure:
        w = unknowns[k]
        params = unknowns[k + 1:k + 1 + NPARAM[kind]]
        k += 1 + NPARAM[kind]
        for bary in orbit_fn(kind, params):
            pts.append(bary)
            wts.append(w)
    return pts, wts


def residuals(structure, orbit_fn, dim, degree, unknowns, measure):
    pts, wts = expand(structure, orbit_fn, unknowns)
    res = []
    for e in monomials(dim, degree):
        s = 0
        for bary, w in zip(pts, wts):
            term = w * measure
            for i in range(dim):
                term *= bary[i + 1] ** e[i]
            s += term
        res.append(s - exact_moment(e))
    return res


def polish(structure, orbit_fn, dim, degree, start, measure, iters=60):
    x = [mp.mpf(v) for v in start]
    h = mp.mpf(10) ** (-25)
    for _ in range(iters):
        r = mp.matrix(residuals(structure, orbit_fn, dim, degree, x, measure))
        if mp.norm(r) < mp.mpf(10) ** (-34):
            break
        jac = mp.matrix(len(r), len(x))
        for j in range(len(x)):
            xp = list(x)
            xm = list(x)
            xp[j] += h
            xm[j] -= h
            rp = residuals(structure, orbit_fn, dim, degree, xp, measure)
            rm = residuals(structure, orbit_fn, dim, degree, xm, measure)
            for i in range(len(r)):
                jac[i, j] = (rp[i] - rm[i]) / (2 * h)
        step = mp.lu_solve(jac.T * jac, jac.T * r)
        x = [x[j] - step[j] for j in range(len(x))]
    r = residuals(structure, orbit_fn, dim, degree, x, measure)
    return x, max(abs(v) for v in r)


def solve_tet(seed):
    structure = ["S4", "S31", "S22", "S211", "S211"]
    rng = np.random.default_rng(seed)
    mons = monomials(3, 7)
    exact = np.array([float(exact_moment(e)) for e in mons])

    def orb_np(kind, p):
        if kind == "S4":
            base = [(0.25, 0.25, 0.25, 0.25)]
        elif kind == "S31":
            base = unique_perms((p[0], p[0], p[0], 1 - 3 * p[0]))
        elif kind == "S22":
            base = unique_perms((p[0], p[0], 0.5 - p[0], 0.5 - p[0]))
        else:
            base = unique_perms((p[0], p[0], p[1], 1 - 2 * p[0] - p[1]))
        return np.array(base)

    expo = np.array(mons)

    def fun(u):
        k = 0
        res = -exact.copy()
        for kind in structure:
            w = u[k]
            params = u[k + 1:k + 1 + NPARAM[kind]]
            k += 1 + NPARAM[kind]
            b = orb_np(kind, params)
            vals = np.prod(b[:, None, 1:] ** expo[None, :, :], axis=2)
            res += w * vals.sum(axis=0)
        return res

    for attempt in range(400):
        u0 = []
        for kind in structure:
            u0.append(rng.uniform(0.05, 0.5) / 35)
            u0.extend(rng.uniform(0.02, 0.3, NPARAM[kind]))
        sol = least_squares(fun, u0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.max(np.abs(sol.fun)) > 1e-12:
            continue
        pts, wts = expand(structure, tet_orbits, [mp.mpf(v) for v in sol.x])
        if min(wts) <= 0 or min(min(p) for p in pts) <= 0:
            continue
        x, err = polish(structure, tet_orbits, 3, 7, sol.x, 1)
        pts, wts = expand(structure, tet_orbits, x)
        if min(wts) > 0 and min(min(p) for p in pts) > 0:
            return structure, x, err, attempt
    raise RuntimeError("no positive interior rule found")


def solve_tri():
    structure = ["S3", "S21", "S21", "S21", "S111"]
    # published degree-8 Dunavant values (weights sum to 1)
    start = [0.144315607677787,
             0.095091634267285, 0.459292588292723,
             0.103217370534718, 0.170569307751760,
             0.032458497623198, 0.050547228317031,
             0.027230314174435, 0.008394777409958, 0.263112829634638]
    x, err = polish(structure, tri_orbits, 2, 8, start, mp.mpf(1) / 2)
    return structure, x, err


def fmt(v):
    return mp.nstr(v, 25, min_fixed=-1, max_fixed=1)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    print("// Gauss-Legendre, 6 points on [0,1]")
    xs, ws = np.polynomial.legendre.leggauss(6)
    for x0, w0 in zip(xs, ws):
        # Newton polish in mpmath
        x = mp.mpf(x0)
        for _ in range(10):
            p, dp = mp.legendre(6, x), mp.diff(lambda t: mp.legendre(6, t), x)
            x -= p / dp
        dp = mp.diff(lambda t: mp.legendre(6, t), x)
        w = 2 / ((1 - x ** 2) * dp ** 2)
        print(f"  {{{fmt((x + 1) / 2)}, {fmt(w / 2)}}},")

    structure, x, err = solve_tri()
    print(f"// triangle degree 8, structure {structure}, max moment residual {mp.nstr(err, 3)}")
    k = 0
    for kind in structure:
        n = NPARAM[kind]
        print(f"  {kind}: weight {fmt(x[k] / 2)} params {[fmt(v) for v in x[k + 1:k + 1 + n]]}")
        k += 1 + n

    structure, x, err, attempt = solve_tet(args.seed)
    print(f"// tetrahedron degree 7, structure {structure}, max moment residual {mp.nstr(err, 3)}"
          f" (attempt {attempt})")
    k = 0
    for kind in structure:
        n = NPARAM[kind]
        print(f"  {kind}: weight {fmt(x[k])} params {[fmt(v) for v in x[k + 1:k + 1 + n]]}")
        k += 1 + n


if __name__ == "__main__":
    main()
