"""Quaternion algebra on numpy arrays.

A quaternion is stored as the trailing axis of length 4, ordered
``(r, i, j, k)``.  Every function broadcasts over the leading axes, so the
same code handles a single value and a full 2-D or 4-D field.

For the fast transforms a quaternion ``q`` is also written in split form
``q = c1 + c2 j`` with ``c1 = r + i*qi`` and ``c2 = qj + i*qk`` ordinary
complex numbers (the imaginary unit of numpy playing the role of ``i``).
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = [
    "Quaternion",
    "as_quat",
    "mul",
    "conj",
    "modulus",
    "modulus2",
    "scalar_part",
    "split",
    "join",
    "exp_i",
    "exp_j",
    "from_complex_i",
    "from_complex_j",
    "ONE",
    "I",
    "J",
    "K",
]


class Quaternion(NamedTuple):
    """A single quaternion value ``r + i*qi + j*qj + k*qk``."""

    r: float = 0.0
    i: float = 0.0
    j: float = 0.0
    k: float = 0.0

    def __array__(self, dtype=None, copy=None):
        return np.array(tuple(self), dtype=dtype or float)


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def as_quat(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape[-1:] != (4,):
        raise ValueError(f"expected trailing axis of length 4, got shape {q.shape}")
    return q


def mul(p, q) -> np.ndarray:
    """Hamilton product ``p q`` (broadcasting)."""
    p = as_quat(p)
    q = as_quat(q)
    pr, pi, pj, pk = np.moveaxis(p, -1, 0)
    qr, qi, qj, qk = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pr * qr - pi * qi - pj * qj - pk * qk,
            pr * qi + pi * qr + pj * qk - pk * qj,
            pr * qj - pi * qk + pj * qr + pk * qi,
            pr * qk + pi * qj - pj * qi + pk * qr,
        ],
        axis=-1,
    )


def conj(q) -> np.ndarray:
    q = as_quat(q)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def modulus2(q) -> np.ndarray:
    q = as_quat(q)
    return np.einsum("...c,...c->...", q, q)


def modulus(q) -> np.ndarray:
    """``|q|``, scaled by the largest component so tiny or huge entries do not under/overflow."""
    q = as_quat(q)
    big = np.max(np.abs(q), axis=-1)
    safe = np.where(big > 0, big, 1.0)
    r = q / safe[..., None]
    return big * np.sqrt(np.einsum("...c,...c->...", r, r))


def scalar_part(q) -> np.ndarray:
    return as_quat(q)[..., 0]


def split(q) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(c1, c2)`` with ``q = c1 + c2 j``."""
    q = as_quat(q)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


def join(c1, c2) -> np.ndarray:
    """Inverse of :func:`split`."""
    c1 = np.asarray(c1, dtype=complex)
    c2 = np.asarray(c2, dtype=complex)
    c1, c2 = np.broadcast_arrays(c1, c2)
    return np.stack([c1.real, c1.imag, c2.real, c2.imag], axis=-1)


def from_complex_i(z) -> np.ndarray:
    """Embed complex numbers as ``Re z + i Im z``."""
    z = np.asarray(z, dtype=complex)
    zeros = np.zeros(z.shape)
    return np.stack([z.real, z.imag, zeros, zeros], axis=-1)


def from_complex_j(z) -> np.ndarray:
    """Embed complex numbers as ``Re z + j Im z``."""
    z = np.asarray(z, dtype=complex)
    zeros = np.zeros(z.shape)
    return np.stack([z.real, zeros, z.imag, zeros], axis=-1)


def exp_i(theta) -> np.ndarray:
    """``e^{i theta}`` as quaternions."""
    return from_complex_i(np.exp(1j * np.asarray(theta, dtype=float)))


def exp_j(theta) -> np.ndarray:
    """``e^{j theta}`` as quaternions."""
    return from_complex_j(np.exp(1j * np.asarray(theta, dtype=float)))
