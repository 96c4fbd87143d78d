"""Laguerre functions and Gauss-Laguerre quadrature that stay finite at large order.

``scipy.special.roots_laguerre`` overflows for a few hundred nodes, and the
classical weights underflow long before that.  Here the nodes come from the
Jacobi matrix (Golub-Welsch) followed by Newton polishing, and the weights
are returned pre-multiplied by ``exp(u)``, so the quadrature reads

    int_0^inf f(u) du  ~=  sum_k  scaled_weight_k * exp(-u_k) * f(u_k)

and products of the functions ``exp(-u/2) L_n(u)`` can be summed directly.
"""
from __future__ import annotations

import functools

import numpy as np
from scipy.linalg import eigh_tridiagonal

_RESCALE = 1e100


def laguerre_functions(n, u):
    """Rows ``k = 0..n-1`` of ``exp(-u/2) * L_k(u)`` evaluated at the points ``u``.

    The three-term recurrence runs on rescaled values with the exponential
    factor tracked in log form, so nothing overflows for ``u`` in the
    thousands.
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros((n, u.size))
    if n == 0:
        return out
    logs = -0.5 * u
    p0 = np.ones_like(u)
    out[0] = np.exp(logs)
    if n == 1:
        return out
    p1 = 1.0 - u
    out[1] = p1 * np.exp(logs)
    for k in range(1, n - 1):
        p2 = ((2 * k + 1 - u) * p1 - k * p0) / (k + 1)
        big = np.maximum(np.abs(p2), np.abs(p1))
        s = np.where(big > _RESCALE, big, 1.0)
        p0, p1 = p1 / s, p2 / s
        logs = logs + np.log(s)
        with np.errstate(under="ignore"):
            out[k + 1] = p1 * np.exp(logs)
    return out


def _last_two(Q, u):
    """``exp(-u/2) L_{Q-1}(u)`` and ``exp(-u/2) L_Q(u)`` up to a common positive factor."""
    p0 = np.ones_like(u)
    p1 = 1.0 - u
    if Q == 1:
        return p0, p1
    for k in range(1, Q):
        p2 = ((2 * k + 1 - u) * p1 - k * p0) / (k + 1)
        big = np.maximum(np.abs(p2), np.abs(p1))
        s = np.where(big > _RESCALE, big, 1.0)
        p0, p1 = p1 / s, p2 / s
    return p0, p1


def _christoffel_sum(Q, u):
    """``sum_{k<Q} (exp(-u/2) L_k(u))**2``, accumulated in rescaled units."""
    logs = -0.5 * u
    p0 = np.ones_like(u)
    p1 = 1.0 - u
    acc = p0 ** 2 + (p1 ** 2 if Q > 1 else 0.0)
    for k in range(1, Q - 1):
        p2 = ((2 * k + 1 - u) * p1 - k * p0) / (k + 1)
        big = np.maximum(np.abs(p2), np.abs(p1))
        s = np.where(big > _RESCALE, big, 1.0)
        p0, p1 = p1 / s, p2 / s
        acc = acc / s ** 2 + p1 ** 2
        logs = logs + np.log(s)
    with np.errstate(under="ignore", over="ignore"):
        return acc * np.exp(2 * logs)


@functools.lru_cache(maxsize=32)
def gauss_laguerre(Q):
    """Nodes and exp-scaled weights of the Q-point Gauss-Laguerre rule.

    Returns ``(u, scaled_w)`` with ``scaled_w[k] = w[k] * exp(u[k])``.
    """
    Q = int(Q)
    if Q < 1:
        raise ValueError("quadrature order must be positive")
    k = np.arange(Q, dtype=float)
    u = eigh_tridiagonal(2 * k + 1, -np.arange(1, Q, dtype=float), eigvals_only=True)
    for _ in range(4):
        lq1, lq = _last_two(Q, u)
        # L_Q' = Q (L_Q - L_{Q-1}) / u
        u = u - u * lq / (Q * (lq - lq1))
    scaled_w = 1.0 / _christoffel_sum(Q, u)
    u.setflags(write=False)
    scaled_w.setflags(write=False)
    return u, scaled_w


@functools.lru_cache(maxsize=64)
def laguerre_table(n, Q):
    """``laguerre_functions(n, nodes)`` for the Q-point rule (cached, read-only)."""
    u, _ = gauss_laguerre(Q)
    table = laguerre_functions(n, u)
    table.setflags(write=False)
    return table


def laguerre_line_functions(n, t):
    """Orthonormal functions ``l_k(t) = sqrt(2) exp(-t) L_k(2t)`` on (0, inf)."""
    return np.sqrt(2.0) * laguerre_functions(n, 2 * np.asarray(t, dtype=float))


@functools.lru_cache(maxsize=64)
def _legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def composite_rule(Q, cuts):
    """Nodes and weights for ``int_0^inf h(u) du`` with ``h`` smooth between ``cuts``.

    ``h`` must already carry its ``exp(-u)`` factor (as products of
    :func:`laguerre_functions` do).  Each finite piece gets a ``Q``-point
    Gauss-Legendre rule, the last piece ``[B, inf)`` the shifted Q-point
    Gauss-Laguerre rule with exp-scaled weights.
    """
    cuts = sorted({float(c) for c in cuts if c > 0 and np.isfinite(c)})
    edges = [0.0] + cuts
    xs, ws = [], []
    xl, wl = _legendre(int(Q))
    for a, b in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (b - a) * xl + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * wl)
    u, sw = gauss_laguerre(int(Q))
    xs.append(edges[-1] + u)
    ws.append(sw)
    return np.concatenate(xs), np.concatenate(ws)
