import numpy as np
from scipy.spatial import cKDTree


def _pts(z):
    z = np.asarray(z, dtype=complex).ravel()
    z = z[np.isfinite(z)]
    return np.column_stack([z.real, z.imag])


def hausdorff(a, b):
    """Symmetric Hausdorff distance between two complex point clouds."""
    pa, pb = _pts(a), _pts(b)
    return max(cKDTree(pb).query(pa)[0].max(), cKDTree(pa).query(pb)[0].max())
