"""Far-field weights: lattice points outside the quadrature ball, summed over periodic images.

Outside the ball ``|y| >= r0`` the slope ratio ``q = (f(x)-f(x-y))**2 / |y|**2``
is small, so every integrand is expanded in powers of ``q``. For a periodic
field the difference ``f(x) - f(x-y)`` depends only on the torus class of
``y``, so each power reduces to one precomputed lattice sum per class:

    W_n(c) = sum_{y in c + N Z^d, |y| >= r0} (y/|y|**(d+1)) |hy|**eps (r0/|y|)**(2n)   (odd, vector)
    V_n(c) = sum_{y in c + N Z^d, |y| >= r0} |y|**(1-d) ... (r0/|y|)**(2n)             (even, scalar)

with everything in index units. In 1D the sums are Hurwitz zeta values; in
2D they are summed directly over a square of images, where opposite images
cancel to leave an O(J**-3) truncation error.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numba import njit
from scipy.special import zeta as hurwitz_zeta

IMAGE_RADIUS_2D = 32


def half_classes(dim: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Canonical half of the nonzero torus classes, as representatives in (-N/2, N/2].

    Returns ``(reps, multiplicity)``: multiplicity is 2 for a class paired
    with its negative and 1 for the self-paired classes (components 0 or N/2).
    """
    r = np.arange(-(n // 2) + 1, n // 2 + 1)
    if dim == 1:
        reps = r[r > 0].reshape(-1, 1)
    else:
        a, b = np.meshgrid(r, r, indexing="ij")
        a, b = a.ravel(), b.ravel()
        # a class and its negative: pick the one with (a mod N, b mod N) lexicographically smaller
        am, bm = a % n, b % n
        na, nb = (-a) % n, (-b) % n
        keep = ((am < na) | ((am == na) & (bm <= nb))) & ~((a == 0) & (b == 0))
        reps = np.stack([a[keep], b[keep]], axis=1)
    neg = (-reps) % n
    self_paired = np.all(neg == reps % n, axis=1)
    mult = np.where(self_paired, 1.0, 2.0)
    return np.ascontiguousarray(reps, dtype=np.int64), mult


def _scaled_sum_1d(rep: np.ndarray, n: int, r0: float, k: int, s: float, odd: bool) -> np.ndarray:
    """``sum (r0/|y|)**(2k) sign(y)**odd |y|**-s`` over ``y = rep + n j``, ``|y| >= r0``."""
    x = rep / n
    pos = hurwitz_zeta(2 * k + s, 1 + x)
    neg = hurwitz_zeta(2 * k + s, 1 - x)
    images = (r0 / n) ** (2 * k) * n**-s * (pos - neg if odd else pos + neg)
    ay = np.maximum(np.abs(rep), 1)
    own = np.where(ay >= r0, np.minimum(r0 / ay, 1.0) ** (2 * k) * ay**-s, 0.0)
    return images + (np.sign(rep) * own if odd else own)


@lru_cache(maxsize=32)
def weights_1d(n: int, r0: float, n_terms: int, eps: float = 0.0, h: float = 1.0):
    """``(reps, mult, W, V)`` with W, V of shape (classes, n_terms) for orders 1..n_terms."""
    reps, mult = half_classes(1, n)
    y = reps[:, 0].astype(float)
    W = np.zeros((len(y), n_terms))
    V = np.zeros((len(y), n_terms))
    for k in range(1, n_terms + 1):
        W[:, k - 1] = _scaled_sum_1d(y, n, r0, k, 1 - eps, True) * h**eps
        V[:, k - 1] = _scaled_sum_1d(y, n, r0, k, 0.0, False)
    for a in (W, V):
        a.setflags(write=False)
    return reps, mult, W, V


@njit(cache=True)
def _weights_2d(reps, n, r0, n_terms, eps, h, J):
    m = reps.shape[0]
    W = np.zeros((m, n_terms, 2))
    V = np.zeros((m, n_terms))
    r02 = r0 * r0
    for c in range(m):
        for j1 in range(-J, J + 1):
            for j2 in range(-J, J + 1):
                y1 = float(reps[c, 0] + n * j1)
                y2 = float(reps[c, 1] + n * j2)
                r2 = y1 * y1 + y2 * y2
                if r2 < r02:
                    continue
                r = np.sqrt(r2)
                rho = r02 / r2
                soft = (h * r) ** eps if eps != 0.0 else 1.0
                bx = y1 / (r2 * r) * soft
                by = y2 / (r2 * r) * soft
                bs = 1.0 / r
                p = 1.0
                for k in range(n_terms):
                    p *= rho
                    if p < 1e-24:
                        break
                    W[c, k, 0] += bx * p
                    W[c, k, 1] += by * p
                    V[c, k] += bs * p
    return W, V


@lru_cache(maxsize=32)
def weights_2d(n: int, r0: float, n_terms: int, eps: float = 0.0, h: float = 1.0):
    """``(reps, mult, W, V)``; W has shape (classes, n_terms, 2)."""
    reps, mult = half_classes(2, n)
    W, V = _weights_2d(reps, n, r0, n_terms, eps, h, IMAGE_RADIUS_2D)
    # a self-paired class is symmetric under y -> -y, so its odd sum vanishes;
    # the finite image square is not, so set it exactly
    W[mult == 1] = 0.0
    for a in (W, V):
        a.setflags(write=False)
    return reps, mult, W, V


def weights(dim: int, n: int, r0: float, n_terms: int, eps: float = 0.0, h: float = 1.0):
    if dim == 1:
        return weights_1d(n, float(r0), int(n_terms), float(eps), float(h))
    return weights_2d(n, float(r0), int(n_terms), float(eps), float(h))


def _full_torus(dim, n, reps, mult, values, odd):
    """Scatter half-set class values onto the whole torus (negated on -c when ``odd``)."""
    out = np.zeros((n,) * dim + values.shape[1:])
    out[tuple((reps % n).T)] = values
    paired = mult == 2
    out[tuple((-reps[paired] % n).T)] = -values[paired] if odd else values[paired]
    return out


@lru_cache(maxsize=16)
def spectra(dim: int, n: int, r0: float, n_terms: int, eps: float = 0.0, h: float = 1.0):
    """FFTs of the far-field weights on the full torus.

    Returns ``(W_hat, V_hat)`` with shapes ``(n_terms, dim, *grid)`` and
    ``(n_terms, *grid)``; ``V_hat`` is real because V is even.
    """
    reps, mult, W, V = weights(dim, n, r0, n_terms, eps, h)
    axes = tuple(range(dim))
    if dim == 1:
        W = W[:, :, None]
    Wf = _full_torus(dim, n, reps, mult, W, odd=True)  # (*grid, terms, dim)
    Vf = _full_torus(dim, n, reps, mult, V, odd=False)  # (*grid, terms)
    W_hat = np.fft.fftn(np.moveaxis(Wf, (-2, -1), (0, 1)), axes=tuple(a + 2 for a in axes))
    V_hat = np.fft.fftn(np.moveaxis(Vf, -1, 0), axes=tuple(a + 1 for a in axes)).real
    W_hat.setflags(write=False)
    V_hat.setflags(write=False)
    return W_hat, V_hat


def _centred(f: np.ndarray, scale: float) -> np.ndarray:
    # differences are all that matter; centring keeps binomial terms within the bound on the result
    return (f - 0.5 * (f.max() + f.min())) / scale


def far_remainder(f, grads, W_hat, coef, nterm, r0, h):
    """``sum_c sum_n coef[n] W_n(c).(grad f(x) - grad f(x-c)) q_c(x)**n`` by FFT convolution.

    ``q_c(x) = ((f(x) - f(x-c)) / (h r0))**2`` is expanded binomially, which
    turns every order into circular convolutions with the weight spectra.
    """
    from math import comb

    u = _centred(f, h * r0)
    dim = f.ndim
    pows = [np.ones_like(u)]
    for _ in range(2 * nterm):
        pows.append(pows[-1] * u)
    U = [np.fft.fftn(p) for p in pows]
    GU = [[np.fft.fftn(g * p) for g in grads] for p in pows]
    out = np.zeros_like(u)
    for p in range(2 * nterm + 1):
        vec = np.zeros((dim,) + u.shape, dtype=complex)
        sc = np.zeros(u.shape, dtype=complex)
        for k in range(max(1, (p + 1) // 2), nterm + 1):
            j = 2 * k - p
            cf = coef[k] * comb(2 * k, j) * (-1) ** j
            if cf == 0:
                continue
            Wk = W_hat[k - 1]
            vec += cf * Wk * U[j]
            sc += cf * sum(Wk[a] * GU[j][a] for a in range(dim))
        conv = np.fft.ifftn(vec, axes=tuple(range(1, dim + 1))).real
        out += pows[p] * (sum(grads[a] * conv[a] for a in range(dim)) - np.fft.ifftn(sc).real)
    return out


def far_dissipation(f, V_hat, coef, nterm, r0, h) -> float:
    """``sum_x sum_c sum_n coef[n] V_n(c) q_c(x)**n`` (all torus classes) by Fourier inner products."""
    from math import comb

    u = _centred(f, h * r0)
    pows = [np.ones_like(u)]
    for _ in range(2 * nterm):
        pows.append(pows[-1] * u)
    U = [np.fft.fftn(p) for p in pows]
    total = 0.0
    for k in range(1, nterm + 1):
        Vk = V_hat[k - 1]
        acc = 0.0
        for j in range(2 * k + 1):
            # sum_x u**(2k-j) (V * u**j) = N**-d sum conj(U_{2k-j}) V_hat U_j
            acc += comb(2 * k, j) * (-1) ** j * float(np.sum((np.conj(U[2 * k - j]) * Vk * U[j]).real))
        total += coef[k] * acc
    return total / u.size
