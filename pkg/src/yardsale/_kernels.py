"""Compiled inner loops (numba).

Kept separate so the jit machinery stays out of the public modules. All
kernels are deterministic: randomness is drawn by the callers with numpy
Generators and passed in as arrays.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def apply_transactions(wealths, idx_i, idx_j, betas, quantum):
    """Run a batch of pair exchanges in place.

    Transfers rint(beta * min(wi, wj) / quantum) * quantum from i to j.
    Keeping every wealth an exact multiple of the power-of-two quantum makes
    each update and every subsequent sum exact in floating point, so total
    wealth is conserved bit for bit.
    """
    for k in range(betas.size):
        i = idx_i[k]
        j = idx_j[k]
        wi = wealths[i]
        wj = wealths[j]
        m = wi if wi < wj else wj
        dw = np.rint(betas[k] * m / quantum) * quantum
        wealths[i] = wi - dw
        wealths[j] = wj + dw


@njit(cache=True)
def _lerp_zero(nodes, values, x):
    """Piecewise-linear interpolant of values; 0 beyond the last node."""
    n = nodes.size
    if x >= nodes[n - 1]:
        if x == nodes[n - 1]:
            return values[n - 1]
        return 0.0
    if x <= nodes[0]:
        return values[0]
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if nodes[mid] <= x:
            lo = mid
        else:
            hi = mid
    t = (x - nodes[lo]) / (nodes[hi] - nodes[lo])
    return values[lo] + t * (values[hi] - values[lo])


@njit(cache=True)
def gain_loss_inner(nodes, p, icum, n_agents, bnodes, bweights, out):
    """Quadratic collision piece of the exchange operator.

    For each node w and each exchange fraction b (quadrature node with
    weight already including the beta density):

        (1/N) * [ int_0^u P(x) P(w - b x) dx  -  P(u)/(1+b) * int_0^u P(x) dx ]

    with u = w/(1+b). The x integral is a trapezoid sum on the grid cells
    below u plus an exact partial cell; the integrand at x = u collapses to
    P(u)^2 because w - b u = u. Density values beyond the last node count
    as zero (truncation; callers monitor the implied leakage).
    """
    n = nodes.size
    wmax = nodes[n - 1]
    for i in range(n):
        w = nodes[i]
        acc = 0.0
        for k in range(bnodes.size):
            b = bnodes[k]
            opb = 1.0 + b
            u = w / opb
            gprev = p[0] * p[i]
            t_int = 0.0
            ucap = u if u < wmax else wmax
            j = 0
            while j + 1 < n and nodes[j + 1] <= ucap:
                arg = w - b * nodes[j + 1]
                g = p[j + 1] * _lerp_zero(nodes, p, arg)
                t_int += 0.5 * (gprev + g) * (nodes[j + 1] - nodes[j])
                gprev = g
                j += 1
            if u <= wmax:
                # inclusive: at u == wmax the partial cell is zero-width and
                # the loss keeps P(wmax) = p[-1], matching _lerp_zero
                pu = _lerp_zero(nodes, p, u)
                t_int += 0.5 * (gprev + pu * pu) * (u - nodes[j])
                # exact trapezoid prefix of the interpolant up to u, not a
                # lerp of icum (that would weight the partial cell by the
                # far node instead of P(u))
                iu = icum[j] + 0.5 * (p[j] + pu) * (u - nodes[j])
                loss = pu / opb * iu
            else:
                loss = 0.0
            acc += bweights[k] * (t_int - loss)
        out[i] = acc / n_agents
