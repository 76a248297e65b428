"""Independent 2x2 transfer-matrix solution of the rectangular potential.

Used as an oracle for the scattering module: it never touches the
closed-form amplitude expressions, only wave-function matching at x = 0
and x = a.
"""

import numpy as np

from larmor.errors import DomainError
from larmor.phases import phasor


def _wave_matrix(k, x) -> np.ndarray:
    """Rows: psi and psi' of (e^{ikx}, e^{-ikx}) evaluated at x."""
    forward = phasor(k, x)
    backward = phasor(-k, x)
    k = np.asarray(k)
    m = np.empty(np.broadcast(forward, backward).shape + (2, 2), dtype=complex)
    m[..., 0, 0] = forward
    m[..., 0, 1] = backward
    m[..., 1, 0] = 1j * k * forward
    m[..., 1, 1] = -1j * k * backward
    return m


def transfer_matrix(k, k_chan, a) -> np.ndarray:
    """Map (right-moving, left-moving) coefficients from x < 0 to x > a."""
    zero = np.zeros_like(np.asarray(a, dtype=float))
    entry = np.linalg.solve(_wave_matrix(k_chan, zero), _wave_matrix(k, zero))
    exit_ = np.linalg.solve(_wave_matrix(k, a), _wave_matrix(k_chan, a))
    return exit_ @ entry


def transfer_matrix_amplitudes(k, k_chan, a) -> tuple[np.ndarray, np.ndarray]:
    """(t, r) for unit incidence from the left, t being the e^{ikx} coefficient beyond x = a."""
    k_arr = np.asarray(k, dtype=float)
    a_arr = np.asarray(a, dtype=float)
    if np.any(~np.isfinite(k_arr)) or np.any(k_arr <= 0):
        raise DomainError("k", "must be positive and finite")
    if np.any(~np.isfinite(a_arr)) or np.any(a_arr <= 0):
        raise DomainError("a", "must be positive and finite")
    if np.any(np.asarray(k_chan) == 0):
        raise DomainError("k_chan", "threshold channel has no transfer matrix")

    k_arr, k_chan, a_arr = np.broadcast_arrays(k_arr, np.asarray(k_chan), a_arr)
    m = transfer_matrix(k_arr, k_chan, a_arr)
    # c_right = M c_left with c_left = (1, r) and c_right = (t, 0)
    r = -m[..., 1, 0] / m[..., 1, 1]
    t = m[..., 0, 0] + m[..., 0, 1] * r
    if t.ndim == 0:
        return complex(t), complex(r)
    return t, r
