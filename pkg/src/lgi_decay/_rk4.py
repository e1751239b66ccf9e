import numpy as np


def rk4_step(f, t, y, h):
    """One classical fourth-order Runge-Kutta step for complex ``y' = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_linear_matrix(a: np.ndarray, h: float) -> np.ndarray:
    """Propagation matrix of one RK4 step applied to the autonomous system ``y' = a y``.

    Classical RK4 on a linear constant-coefficient system reduces exactly to the
    fourth-order Taylor polynomial of ``exp(h a)``.
    """
    ha = h * np.asarray(a, dtype=complex)
    eye = np.eye(ha.shape[0], dtype=complex)
    out = eye.copy()
    term = eye
    for k in range(1, 5):
        term = term @ ha / k
        out = out + term
    return out
