"""Reference numpy implementation of the integration kernels.

Mirrors ``_ckernels.pyx`` one to one; used when the compiled module is
unavailable or ``TORPEDO_SMC_PURE_PYTHON`` is set.
"""

import numpy as np


def rk4_affine(A, x, c, dt):
    """One classical RK4 step of ``xdot = A @ x + c`` with ``c`` held constant."""
    k1 = A @ x + c
    k2 = A @ (x + (0.5 * dt) * k1) + c
    k3 = A @ (x + (0.5 * dt) * k2) + c
    k4 = A @ (x + dt * k3) + c
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_affine_trajectory(A, x0, c_seq, dt):
    """Integrate ``len(c_seq)`` steps; row ``i`` of ``c_seq`` is held on step ``i``.

    Returns an array of shape ``(len(c_seq) + 1, n)`` starting with ``x0``.
    """
    steps = c_seq.shape[0]
    out = np.empty((steps + 1, x0.shape[0]))
    out[0] = x0
    x = x0
    for i in range(steps):
        x = rk4_affine(A, x, c_seq[i], dt)
        out[i + 1] = x
    return out
