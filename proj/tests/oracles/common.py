"""Dense NumPy reference operators on the cell-centered Neumann grid.

Arrays are indexed [j, i] (y slow, x fast) so that ravel() matches the C++
storage order i + nx * j.
"""
import numpy as np


def centers(n, length, origin=0.0):
    h = length / n
    return origin + (np.arange(n) + 0.5) * h


def lap(f, hx, hy):
    g = np.pad(f, 1, mode="edge")
    return ((g[1:-1, 2:] - 2 * f + g[1:-1, :-2]) / hx**2
            + (g[2:, 1:-1] - 2 * f + g[:-2, 1:-1]) / hy**2)


def k_apply(f, hx, hy, a, alpha):
    l1 = lap(f, hx, hy)
    return 0.5 * lap(l1, hx, hy) + a * l1 + 0.5 * alpha * f


def free_energy(phi, hx, hy, a, alpha):
    w = hx * hy
    return w * np.sum(phi * k_apply(phi, hx, hy, a, alpha)) + 0.25 * w * np.sum(phi**4)


def dense(op, ny, nx):
    n = nx * ny
    m = np.zeros((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        m[:, k] = op(e.reshape(ny, nx)).ravel()
    return m
