"""NumPy implementation of the hot kernels (fallback for ``_kernels.pyx``).

Both implementations follow the same scheme. Squared distances are screened
through a single-precision Gram product (one BLAS call per block) and any row whose two best
sites are closer than a rigorous round-off bound is re-scanned with exact
coordinate differences, accumulated dimension by dimension in index order.
Owners are therefore the exact floating-point nearest sites with the lowest
index winning ties, and both backends agree on them bit for bit.
"""

from __future__ import annotations

import numpy as np

BLOCK = 8192
_EPS32 = float(np.finfo(np.float32).eps)


def screen_bound(dim: int) -> float:
    # generous multiple of the float32 dot-product error gamma_{D+4}; a loose
    # bound only costs extra refinements, a tight one would cost exactness
    return 4.0 * (dim + 4) * _EPS32


def exact_sqdist(points: np.ndarray, sites: np.ndarray) -> np.ndarray:
    """Squared distances with a fixed left-to-right sum over coordinates."""
    acc = np.zeros((points.shape[0], sites.shape[0]))
    for k in range(points.shape[1]):
        t = points[:, k, None] - sites[None, :, k]
        t *= t
        acc += t
    return acc


def nearest_site(cands: np.ndarray, sites: np.ndarray, origin: np.ndarray) -> np.ndarray:
    cands = np.ascontiguousarray(cands, dtype=float)
    sites = np.ascontiguousarray(sites, dtype=float)
    m, d = cands.shape
    n = sites.shape[0]
    owner = np.empty(m, dtype=np.intp)
    if n == 1:
        owner.fill(0)
        return owner
    sc = sites - origin
    sn = np.einsum("ij,ij->i", sc, sc)
    sc32T = np.ascontiguousarray(sc.T, dtype=np.float32)
    smax = np.sqrt(sn.max())
    gamma = screen_bound(d)
    for a in range(0, m, BLOCK):
        blk = cands[a:a + BLOCK]
        rows = np.arange(blk.shape[0])
        bc = blk - origin
        q = sn - 2.0 * (bc.astype(np.float32) @ sc32T).astype(float)
        arg = np.argmin(q, axis=1)
        best = q[rows, arg]
        q[rows, arg] = np.inf
        second = q.min(axis=1)
        cn = np.sqrt(np.einsum("ij,ij->i", bc, bc))
        bound = 2.0 * gamma * (cn + smax) ** 2
        flagged = np.flatnonzero(second - best <= bound)
        if flagged.size:
            exact = exact_sqdist(blk[flagged], sites)
            arg[flagged] = np.argmin(exact, axis=1)
        owner[a:a + blk.shape[0]] = arg
    return owner


def tps_eval(
    u: np.ndarray, centers: np.ndarray, weights: np.ndarray, poly: np.ndarray
) -> np.ndarray:
    """Thin-plate-spline sum plus linear tail at rows of ``u``.

    ``u`` and ``centers`` are normalized coordinates in [0, 1]^D. Squared
    radii come from a Gram product on coordinates centered at 0.5.
    """
    u = np.ascontiguousarray(u, dtype=float)
    cc = centers - 0.5
    cn = np.einsum("ij,ij->i", cc, cc)
    out = np.empty(u.shape[0])
    for a in range(0, u.shape[0], BLOCK):
        blk = u[a:a + BLOCK]
        bc = blk - 0.5
        r2 = np.einsum("ij,ij->i", bc, bc)[:, None] + cn - 2.0 * (bc @ cc.T)
        np.maximum(r2, 0.0, out=r2)
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = np.where(r2 > 0.0, 0.5 * r2 * np.log(r2), 0.0)
        out[a:a + blk.shape[0]] = phi @ weights + poly[0] + blk @ poly[1:]
    return out


def top_membership(
    cands: np.ndarray, sites: np.ndarray, in_top: np.ndarray, origin: np.ndarray
) -> np.ndarray:
    """Boolean mask: candidate's nearest site (lowest index on ties) is flagged in ``in_top``."""
    return np.asarray(in_top, dtype=bool)[nearest_site(cands, sites, origin)]


def scale_unit(block: np.ndarray, lo: np.ndarray, width: np.ndarray, hi: np.ndarray) -> None:
    """In place: ``block = min(lo + block * width, hi)``."""
    block *= width
    block += lo
    np.minimum(block, hi, out=block)
