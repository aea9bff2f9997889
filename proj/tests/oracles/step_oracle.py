"""Two steps (first-order start, then one extrapolated step) of each scheme on an
8x8 grid, solved as a dense linear system in phi^{n+1} directly.

Setup: h = 1, a = 1, alpha = 0.675, M = 1, eta = 10, C0 = 1, dt = 0.1,
phi0[j, i] = 0.3 + 0.4 cos(0.7 i + 0.3) sin(0.5 j + 0.2), m0 = <phi0, 1> + 0.5.
"""
import numpy as np

from common import dense, k_apply, lap

nx = ny = 8
h = 1.0
w = h * h
area = nx * ny * w
a, alpha, M, eta, c0, dt = 1.0, 0.675, 1.0, 10.0, 1.0, 0.1
I, J = np.meshgrid(np.arange(nx), np.arange(ny))
phi0 = (0.3 + 0.4 * np.cos(0.7 * I + 0.3) * np.sin(0.5 * J + 0.2)).ravel()
m0 = w * phi0.sum() + 0.5

N = nx * ny
Kd = dense(lambda f: k_apply(f, h, h, a, alpha), ny, nx)
Ld = dense(lambda f: lap(f, h, h), ny, nx)
ones = np.ones(N)


def quartic(phi):
    return 0.25 * w * np.sum(phi**4)


def g_of(phi):
    return phi**3 / (2 * np.sqrt(quartic(phi) + c0))


def energy(scheme, phi, q, r, zeta):
    e = w * phi @ (Kd @ phi)
    e += 0.25 * w * np.sum(q**2) if "EQ" in scheme else r**2 - c0
    if "-P-" in scheme:
        e += 0.5 * zeta**2
    return e


def step(scheme, prev, cur, q, r, zeta, first):
    eq = scheme.endswith("EQ")
    ch = scheme.startswith("CH")
    lagrange = "-L-" in scheme
    penalty = "-P-" in scheme
    # mu = Mmu @ X + mu_c, X = phi^{n+1}
    Mmu = Kd.copy()
    mu_c = Kd @ cur
    if eq:
        qb = 2 * cur if first else 2 * (1.5 * cur - 0.5 * prev)
        Mmu += np.diag(0.25 * qb**2)
        mu_c += 0.5 * qb * q - 0.25 * qb**2 * cur
    else:
        gb = g_of(cur) if first else 1.5 * g_of(cur) - 0.5 * g_of(prev)
        Mmu += np.outer(gb, w * gb)
        mu_c += 2 * gb * r - gb * (w * gb @ cur)
    if penalty:
        se = np.sqrt(eta)
        Mmu += 0.5 * eta * np.outer(ones, w * ones)
        mu_c += se * zeta - 0.5 * eta * (w * ones @ cur)
    P = np.eye(N) - np.outer(ones, w * ones) / area if lagrange else np.eye(N)
    G = -Ld if ch else np.eye(N)
    A = np.eye(N) + dt * M * G @ P @ Mmu
    rhs = cur - dt * M * G @ P @ mu_c
    X = np.linalg.solve(A, rhs)
    d = X - cur
    mu = Mmu @ X + mu_c
    L = w * mu.sum() / area if lagrange else 0.0
    if eq:
        q = q + qb * d
    else:
        r = r + w * gb @ d
    if penalty:
        zeta = zeta + np.sqrt(eta) * w * d.sum()
    return X, q, r, zeta, L


for scheme in ["AC-EQ", "AC-SAV", "CH-EQ", "CH-SAV", "AC-P-EQ", "AC-P-SAV", "AC-L-EQ", "AC-L-SAV"]:
    q = phi0**2
    r = np.sqrt(quartic(phi0) + c0)
    zeta = np.sqrt(eta) * (w * phi0.sum() - m0)
    phi1, q, r, zeta, _ = step(scheme, phi0, phi0, q, r, zeta, True)
    phi2, q, r, zeta, L = step(scheme, phi0, phi1, q, r, zeta, False)
    print('{"%s", %r, %r, %r, %r, %r},' % (scheme, float(w * phi2.sum()), float(w * phi2 @ phi2), float(phi2[3 + nx * 5]),
                                          float(energy(scheme, phi2, q, r, zeta)), float(L)))
