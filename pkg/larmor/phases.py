"""Phase helpers: accurate plane-wave phasors and wrapping into (-pi, pi]."""

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def _split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = _SPLITTER * x
    hi = c - (c - x)
    return hi, x - hi


def exact_product(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Error-free product: x*y == hi + lo exactly (Dekker)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hi = x * y
    xh, xl = _split(x)
    yh, yl = _split(y)
    lo = ((xh * yh - hi) + xh * yl + xl * yh) + xl * yl
    return hi, lo


def phasor(wavenumber, length):
    """exp(i * wavenumber * length) without losing the product's low bits.

    Rotator phases k*a reach 1e9 rad in realistic sweeps, where rounding the
    product alone costs ~1e-7 rad. Complex (evanescent) wavenumbers fall back
    to plain exponentiation since their phase is a decay.
    """
    if np.iscomplexobj(wavenumber):
        return np.exp(1j * np.asarray(wavenumber) * length)
    hi, lo = exact_product(wavenumber, length)
    return np.exp(1j * hi) * np.exp(1j * lo)


def wrap_phase(phase):
    """Map phases into (-pi, pi]."""
    wrapped = np.arctan2(np.sin(phase), np.cos(phase))
    wrapped = np.where(wrapped <= -np.pi, wrapped + 2.0 * np.pi, wrapped)
    return wrapped.item() if np.ndim(wrapped) == 0 else wrapped


def phase_of(amplitude):
    """Full-quadrant phase of a complex amplitude in (-pi, pi]."""
    angle = np.angle(amplitude)
    angle = np.where(angle <= -np.pi, angle + 2.0 * np.pi, angle)
    return angle.item() if np.ndim(angle) == 0 else angle
