"""Dense linear algebra over labeled tensor factors"""
from typing import Iterable, Optional, Sequence

import numpy as np

from opnet import config
from opnet.errors import LayoutError
from opnet.models.layout import Basis, IndexLayout, SystemId, as_matrix, as_square


def kron(a, b) -> np.ndarray:
    """tensor product; the layout of the result is layout(a) + layout(b)"""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def kron_all(matrices: Iterable) -> np.ndarray:
    """tensor product of a sequence, scalar 1 for an empty one"""
    out = np.ones((1, 1), dtype=np.complex128)
    for m in matrices:
        out = np.kron(out, as_matrix(m))
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    """conjugate transpose"""
    return np.conj(m).T


def partial_trace(m, layout: IndexLayout, traced: Iterable[SystemId]) -> np.ndarray:
    """
    Trace out the named systems.

    The remaining systems keep their order, see ``IndexLayout.remove``.
    """
    traced = set(traced)
    m = layout.check_matrix(m)
    positions = {layout.index(sid) for sid in traced}
    n = len(layout)
    if not positions:
        return m.copy()
    dims = layout.dims
    tensor = m.reshape(dims + dims)
    kets = list(range(n))
    bras = [i if i in positions else n + i for i in range(n)]
    kept = [i for i in range(n) if i not in positions]
    out = kept + [n + i for i in kept]
    reduced = np.einsum(tensor, kets + bras, out)
    side = int(np.prod([dims[i] for i in kept], dtype=np.int64)) if kept else 1
    return reduced.reshape(side, side)


def permute_systems(m, layout: IndexLayout, order: Sequence[SystemId]) -> np.ndarray:
    """reorder the tensor factors of m; the new layout is ``layout.reorder(order)``"""
    m = layout.check_matrix(m)
    layout.reorder(order)
    n = len(layout)
    perm = [layout.index(sid) for sid in order]
    if perm == list(range(n)):
        return m.copy()
    tensor = m.reshape(layout.dims + layout.dims)
    tensor = tensor.transpose(perm + [n + p for p in perm])
    return tensor.reshape(m.shape)


def transpose_in_basis(m, b: Optional[Basis] = None) -> np.ndarray:
    """transposition of the matrix elements expressed in basis b"""
    m = as_square(m)
    if b is None or b.is_computational:
        if b is not None and b.dim != m.shape[0]:
            raise LayoutError(f"basis dimension {b.dim} does not match side {m.shape[0]}")
        return m.T.copy()
    if b.dim != m.shape[0]:
        raise LayoutError(f"basis dimension {b.dim} does not match side {m.shape[0]}")
    u = b.vectors
    return u @ (dagger(u) @ m @ u).T @ dagger(u)


def conjugate_in_basis(
    m, out_basis: Optional[Basis] = None, in_basis: Optional[Basis] = None
) -> np.ndarray:
    """complex conjugation of the matrix elements of m between two bases"""
    m = as_matrix(m)
    if (out_basis is None or out_basis.is_computational) and (
        in_basis is None or in_basis.is_computational
    ):
        return np.conj(m)
    u = out_basis.vectors if out_basis is not None else np.eye(m.shape[0])
    v = in_basis.vectors if in_basis is not None else np.eye(m.shape[1])
    return u @ np.conj(dagger(u) @ m @ v) @ dagger(v)


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + dagger(m)) / 2


def is_hermitian(m, tol: Optional[float] = None) -> bool:
    """max-abs of m - m^dagger within tol"""
    m = as_square(m)
    tol = config.settings.hermitian_tolerance if tol is None else tol
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def min_eigenvalue(m) -> float:
    """smallest eigenvalue of the hermitian part"""
    m = as_square(m)
    return float(np.linalg.eigvalsh(hermitian_part(m))[0])


def is_psd(m, tol: Optional[float] = None) -> bool:
    """hermitian within tol and minimum eigenvalue >= -tol"""
    m = as_square(m)
    psd_tol = config.settings.psd_tolerance if tol is None else tol
    herm_tol = config.settings.hermitian_tolerance if tol is None else tol
    if not is_hermitian(m, herm_tol):
        return False
    return bool(min_eigenvalue(m) >= -psd_tol)


def max_entangled_vector(d: int, b: Optional[Basis] = None) -> np.ndarray:
    """|phi+> = sum_i |i>|i> / sqrt(d) in basis b"""
    if d < 1:
        raise LayoutError(f"dimension must be positive, got {d}")
    vectors = np.eye(d, dtype=np.complex128) if b is None else b.vectors
    if vectors.shape[0] != d:
        raise LayoutError(f"basis dimension {vectors.shape[0]} does not match {d}")
    psi = np.zeros(d * d, dtype=np.complex128)
    for i in range(d):
        psi += np.kron(vectors[:, i], vectors[:, i])
    return psi / np.sqrt(d)


def max_entangled(d: int, b: Optional[Basis] = None) -> np.ndarray:
    """projector onto |phi+>"""
    psi = max_entangled_vector(d, b)
    return np.outer(psi, np.conj(psi))


def smallest_singular_ratio(m) -> float:
    m = as_square(m)
    values = np.linalg.svd(m, compute_uv=False)
    if values[0] == 0:
        return 0.0
    return float(values[-1] / values[0])


def is_unitary(m, tol: Optional[float] = None) -> bool:
    m = as_square(m)
    tol = config.settings.unitarity_tolerance if tol is None else tol
    return bool(np.max(np.abs(dagger(m) @ m - np.eye(m.shape[0]))) <= tol)


def transpose_sign(m, tol: Optional[float] = None) -> int:
    """+1 when m = m^T, -1 when m = -m^T, 0 otherwise"""
    m = as_square(m)
    if tol is None:
        tol = config.settings.unitarity_tolerance * max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.T)) <= tol:
        return 1
    if np.max(np.abs(m + m.T)) <= tol:
        return -1
    return 0


def real_trace(m: np.ndarray) -> float:
    return float(np.real(np.trace(m)))
