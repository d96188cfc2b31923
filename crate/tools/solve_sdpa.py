#!/usr/bin/env python3
"""Solve SDPA sparse files with cvxpy and print the optimal objective.

The files are read as `minimize c.x s.t. sum_i F_i x_i - F_0 >= 0`; the
printed value is the negated minimum, i.e. the maximum of the exported
problem.

usage: solve_sdpa.py FILE... [--solver CLARABEL]
"""
import argparse
import sys

import cvxpy as cp
import numpy as np
import scipy.sparse as sp


def read_sdpa(path):
    with open(path) as fh:
        lines = [l.strip() for l in fh if l.strip() and l.strip()[0] not in '"*']
    clean = lambda l: l.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " ").split()
    m = int(clean(lines[0])[0])
    nb = int(clean(lines[1])[0])
    sizes = [int(t) for t in clean(lines[2])[:nb]]
    c = np.array([float(t) for t in clean(lines[3])[:m]])
    entries = [[[] for _ in range(m + 1)] for _ in range(nb)]
    for l in lines[4:]:
        v, b, i, j, val = l.split()
        entries[int(b) - 1][int(v)].append((int(i) - 1, int(j) - 1, float(val)))
    return m, sizes, c, entries


def sym(n, ents):
    rows, cols, vals = [], [], []
    for i, j, v in ents:
        rows.append(i)
        cols.append(j)
        vals.append(v)
        if i != j:
            rows.append(j)
            cols.append(i)
            vals.append(v)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def solve(path, solver):
    m, sizes, c, entries = read_sdpa(path)
    x = cp.Variable(m)
    cons = []
    for size, ents in zip(sizes, entries):
        n = abs(size)
        if size < 0:
            f0 = sym(n, ents[0]).diagonal()
            fs = sp.csr_matrix(np.array([sym(n, ents[v + 1]).diagonal() for v in range(m)]).T)
            cons.append(fs @ x - f0 >= 0)
        else:
            expr = sum(x[v] * sym(n, ents[v + 1]) for v in range(m) if ents[v + 1]) - sym(n, ents[0])
            s = cp.Variable((n, n), symmetric=True)
            cons += [s == expr, s >> 0]
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    prob.solve(solver=solver)
    return prob.status, -prob.value


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("files", nargs="+")
    ap.add_argument("--solver", default="CLARABEL")
    args = ap.parse_args()
    for f in args.files:
        status, value = solve(f, args.solver)
        print(f"{f}\t{status}\t{value:.12e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
