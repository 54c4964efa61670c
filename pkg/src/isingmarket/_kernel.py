"""Compiled inner loop for the coupled-lattice heat-bath dynamics.

The kernel advances all K lattices by whole sweeps and records the integer
spin sums after each sweep.  It consumes the per-stock random streams in
exactly the same order as the pure-Python operations in `dynamics`:

    per single-site update of stock k:
        u_site   = gens[k].random()     -> site = int(u_site * N), clamped
        u_accept = gens[k].random()     -> new spin +1 iff u_accept < p

so compiled and interpreted trajectories are bit-identical (numba's
Generator support reproduces numpy's scalar draw semantics).

Heat-bath probabilities depend on the site only through the neighbor sum
(5 values) and the current spin (2 values), and on the live magnetizations
otherwise.  Each stock therefore carries a 10-entry probability table that
is rebuilt only when a magnetization it depends on changes, i.e. after a
flip in that stock or, when the coupling matrix links them, in another.
With flip rates of a few percent this cuts most exp() calls; the table
entries are computed with the exact arithmetic of the direct evaluation,
so the caching is invisible in the output.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, error_model="numpy", inline="always")
def _sigmoid(x):
    # 1/(1+exp(-x)) without overflow on either side; for |x| >= 38 the
    # rounded double result equals the saturated closed forms used here.
    if x >= 0.0:
        if x >= 38.0:
            return 1.0
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    if x <= -38.0:
        return e
    return e / (1.0 + e)


@njit(cache=True, error_model="numpy", inline="always")
def _fill_table(ptab, k, jj, alpha, two_beta, gamma_t, m):
    # same term order as dynamics.local_field so cached and directly
    # evaluated probabilities agree bit for bit
    abs_m = abs(m[k])
    for nn_half in range(5):
        nn = 2 * nn_half - 4
        for s_idx in range(2):
            s = 2 * s_idx - 1
            h = jj * nn - alpha * s * abs_m
            for j in range(len(m)):
                h += gamma_t[k, j] * m[j]
            ptab[k, 2 * nn_half + s_idx] = _sigmoid(two_beta * h)


@njit(cache=True, error_model="numpy")
def run_sweeps(spins, sums, neigh, gens, n_sweeps, jj, alpha, two_beta,
               gamma_t, norm_div, sums_out):
    """Advance n_sweeps sweeps in place; record per-sweep spin sums.

    spins    : (K, N) int8, mutated
    sums     : (K,) int64 running spin sums, mutated
    neigh    : (N, 4) int32 torus neighbor table
    gens     : tuple of K np.random.Generator, one stream per stock
    gamma_t  : (K, K) transposed coupling matrix; row k holds the weights
               of every stock's magnetization in stock k's field
    norm_div : magnetization divisor (N for per-site mode, 1 for totals)
    sums_out : (n_sweeps, K) int64, written per sweep
    """
    n_stocks, n_sites = spins.shape
    n_f = float(n_sites)
    m = np.empty(n_stocks)
    for k in range(n_stocks):
        m[k] = sums[k] / norm_div

    # deps[kk, k]: does stock kk's table depend on m[k]?
    deps = np.zeros((n_stocks, n_stocks), dtype=np.bool_)
    for kk in range(n_stocks):
        deps[kk, kk] = True
        for j in range(n_stocks):
            if gamma_t[kk, j] != 0.0:
                deps[kk, j] = True

    ptab = np.empty((n_stocks, 10))
    for k in range(n_stocks):
        _fill_table(ptab, k, jj, alpha, two_beta, gamma_t, m)

    for c in range(n_sweeps):
        for _round in range(n_sites):
            for k in range(n_stocks):
                i = int(gens[k].random() * n_f)
                if i >= n_sites:
                    i = n_sites - 1
                u = gens[k].random()
                s_old = spins[k, i]
                nn = (int(spins[k, neigh[i, 0]]) + int(spins[k, neigh[i, 1]])
                      + int(spins[k, neigh[i, 2]]) + int(spins[k, neigh[i, 3]]))
                idx = (nn + 4) + (1 if s_old > 0 else 0)
                new = np.int8(1) if u < ptab[k, idx] else np.int8(-1)
                if new != s_old:
                    spins[k, i] = new
                    sums[k] += 2 * new
                    m[k] = sums[k] / norm_div
                    for kk in range(n_stocks):
                        if deps[kk, k]:
                            _fill_table(ptab, kk, jj, alpha, two_beta, gamma_t, m)
        for k in range(n_stocks):
            sums_out[c, k] = sums[k]
