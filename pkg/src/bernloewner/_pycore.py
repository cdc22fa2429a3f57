"""Pure-Python implementations of the hot kernels.

``_core`` (compiled from ``_core.pyx``) exposes the same two functions with
identical signatures; :mod:`bernloewner._backend` picks one at import.
"""
import math

import numpy as np

# kernel codes: 1: 1-e^{-lz}; 2: l e^{-lz}; 3: l^2 e^{-lz};
# 4: e^{-lz}-1+lz 1_{(0,1)}(l); 5: e^{-lz}-1+lz
_SERIES_TERMS = 20
_INV_FACT = np.array([1.0 / math.factorial(n) for n in range(_SERIES_TERMS + 1)])


def expm1_sub_linear(w):
    """``e^{-w} - 1 + w`` without cancellation for small ``|w|``."""
    w = np.asarray(w, dtype=complex)
    out = np.expm1(-w) + w
    small = np.abs(w) < 0.5
    if np.any(small):
        ws = -w[small]
        acc = np.zeros_like(ws)
        for n in range(_SERIES_TERMS, 1, -1):
            acc = (acc + _INV_FACT[n]) * ws
        out[small] = acc * ws
    return out


def kernel_values(code, nodes, z):
    nodes = np.asarray(nodes, dtype=float)
    w = nodes * z
    if code == 1:
        return -np.expm1(-w)
    if code == 2:
        return nodes * np.exp(-w)
    if code == 3:
        return nodes * nodes * np.exp(-w)
    if code == 4:
        return np.where(nodes < 1.0, expm1_sub_linear(w), np.expm1(-w))
    if code == 5:
        return expm1_sub_linear(w)
    raise ValueError(f"unknown kernel code {code}")


def kernel_sum(code, nodes, weights, z):
    """``sum_j weights[j] * K(nodes[j], z)`` as a Python complex."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.size == 0:
        return 0j
    vals = kernel_values(code, nodes, complex(z))
    return complex(np.dot(np.asarray(weights, dtype=float), vals))


def generator_atoms(q, a, b, xs, ws, w):
    """Silverstein generator with an atomic measure, evaluated at ``w``."""
    return -q + a * w + b * w * w + kernel_sum(4, xs, ws, w)


def flow_atoms(q, a, b, xs, ws, t, z, rtol, atol, max_step, max_steps):
    """Solve ``dw/dt = -phi(w)``, ``w(0) = z`` up to time ``t``.

    Returns ``(w, steps, rejected)``.
    """
    from .errors import DomainError
    from .numerics import DomainExit, ODEConfig, adaptive_ode_step

    xs = np.ascontiguousarray(xs, dtype=float)
    ws = np.ascontiguousarray(ws, dtype=float)

    def rhs(_t, w):
        return -generator_atoms(q, a, b, xs, ws, w)

    cfg = ODEConfig(rtol=rtol, atol=atol, max_step=max_step, max_steps=max_steps)
    res = adaptive_ode_step(rhs, 0.0, t, z, cfg)
    if isinstance(res, DomainExit):
        raise DomainError(f"flow left the half-plane near t={res.t_lo}")
    return res.y, res.stats.steps, res.stats.rejected
