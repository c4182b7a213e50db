"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np

_CHUNK = 1 << 20


def _green_from_offsets(d, axis, k):
    r2 = np.einsum("...i,...i->...", d, d)
    zero = r2 == 0.0
    r2 = np.where(zero, 1.0, r2)
    r = np.sqrt(r2)
    kr = k * r
    kr2 = kr * kr
    c2 = (d @ axis) ** 2 / r2
    br = 1.0 - 1.0 / kr2 + c2 * (3.0 / kr2 - 1.0)
    bi = (1.0 - 3.0 * c2) / kr
    g = np.exp(1j * kr) / (4.0 * np.pi * r) * (br + 1j * bi)
    return np.where(zero, 0.0, g)


def green_block(obs, src, axis, k):
    obs = np.asarray(obs, dtype=float)
    src = np.asarray(src, dtype=float)
    out = np.empty((len(obs), len(src)), dtype=np.complex128)
    step = max(1, _CHUNK // max(1, len(src)))
    for s in range(0, len(obs), step):
        d = obs[s:s + step, None, :] - src[None, :, :]
        out[s:s + step] = _green_from_offsets(d, axis, k)
    return out


def green_matrix(pos, axis, k):
    return green_block(pos, pos, axis, k)


def green_project(obs, weights, src, axis, k):
    obs = np.asarray(obs, dtype=float)
    out = np.zeros(len(src), dtype=np.complex128)
    step = max(1, _CHUNK // max(1, len(src)))
    for s in range(0, len(obs), step):
        out += weights[s:s + step] @ green_block(obs[s:s + step], src, axis, k)
    return out


def lattice_sum(spacing, kx, ky, axis, k, sigma, radius):
    nmax = int(radius / spacing) + 1
    idx = np.arange(-nmax, nmax + 1) * spacing
    total = 0.0 + 0.0j
    for x in idx:
        y = idx
        r2 = x * x + y * y
        keep = (r2 <= radius * radius) & (r2 > 0.0)
        if not keep.any():
            continue
        y = y[keep]
        d = np.stack([np.full(y.shape, x), y, np.zeros_like(y)], axis=-1)
        g = _green_from_offsets(d, axis, k)
        w = np.exp(-(x * x + y * y) / sigma**2)
        total += np.sum(w * np.exp(1j * (kx * x + ky * y)) * g)
    return total
