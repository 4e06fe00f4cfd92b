"""Rational transfer functions, companion-form realization and RK4 integration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend


class ImproperTransferFunctionError(ValueError):
    """Numerator degree exceeds denominator degree."""


class PoleEvaluationError(ZeroDivisionError):
    """A transfer function was evaluated at one of its poles."""


def _as_coeffs(values, name):
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D coefficient list")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coefficients")
    return arr


@dataclass(frozen=True, eq=False)
class TransferFunction:
    """SISO rational transfer function ``num(p) / den(p)``.

    Coefficients are stored in descending powers of the Laplace variable.
    Leading zeros of the numerator are stripped.
    """

    num: np.ndarray
    den: np.ndarray

    def __init__(self, num, den):
        num = _as_coeffs(num, "num")
        den = _as_coeffs(den, "den")
        if den[0] == 0.0:
            raise ValueError("leading denominator coefficient must be nonzero")
        nz = np.flatnonzero(num)
        num = num[nz[0]:] if nz.size else np.zeros(1)
        if num.size > den.size:
            raise ImproperTransferFunctionError(
                f"improper transfer function: deg(num)={num.size - 1} > deg(den)={den.size - 1}"
            )
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def order(self) -> int:
        return self.den.size - 1

    @property
    def relative_degree(self) -> int:
        return self.den.size - self.num.size

    def __repr__(self):
        return f"TransferFunction(num={self.num.tolist()}, den={self.den.tolist()})"


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Continuous-time LTI model ``xdot = A x + B u``, ``y = C x + D u``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        mats = {}
        for name in ("A", "B", "C", "D"):
            m = np.ascontiguousarray(np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
            m.setflags(write=False)
            mats[name] = m
            object.__setattr__(self, name, m)
        n = mats["A"].shape[0]
        if mats["A"].shape != (n, n):
            raise ValueError(f"A must be square, got {mats['A'].shape}")
        if mats["B"].shape[0] != n:
            raise ValueError(f"B has {mats['B'].shape[0]} rows, expected {n}")
        if mats["C"].shape[1] != n:
            raise ValueError(f"C has {mats['C'].shape[1]} columns, expected {n}")
        if mats["D"].shape != (mats["C"].shape[0], mats["B"].shape[1]):
            raise ValueError(f"D shape {mats['D'].shape} inconsistent with C and B")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]


def tf_from_factored(gain, zeros, poles) -> TransferFunction:
    """Expand ``gain * prod(p - z) / prod(p - p_i)`` into coefficient form.

    The denominator is monic; the gain multiplies the numerator.
    """
    num = float(gain) * np.atleast_1d(np.poly(np.asarray(zeros, dtype=float)))
    den = np.atleast_1d(np.poly(np.asarray(poles, dtype=float)))
    return TransferFunction(np.real(num), np.real(den))


def tf_to_ss(tf: TransferFunction) -> StateSpaceModel:
    """Controllable canonical (companion) realization of a proper ``tf``.

    The last row of ``A`` carries the negated denominator coefficients and
    ``B`` is the last unit vector, so state ``x[i]`` is the ``i``-th
    derivative of the internal chain variable.
    """
    if tf.num.size > tf.den.size:
        raise ImproperTransferFunctionError("tf_to_ss requires a proper transfer function")
    den = tf.den / tf.den[0]
    n = den.size - 1
    num = np.concatenate([np.zeros(n + 1 - tf.num.size), tf.num]) / tf.den[0]
    if n == 0:
        return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[num[0]]])
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -den[1:][::-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    d = num[0]
    C = (num[1:] - d * den[1:])[::-1].reshape(1, n)
    return StateSpaceModel(A, B, C, [[d]])


def eval_tf(tf: TransferFunction, s: complex) -> complex:
    """Evaluate ``num(s) / den(s)``; raises :class:`PoleEvaluationError` at a pole."""
    s = complex(s)
    d = np.polyval(tf.den, s)
    scale = np.polyval(np.abs(tf.den), abs(s))
    if abs(d) <= 1e-14 * scale:
        raise PoleEvaluationError(f"s={s} is a pole of {tf!r}")
    return complex(np.polyval(tf.num, s) / d)


def freq_response(model: StateSpaceModel, s: complex) -> np.ndarray:
    """``C (sI - A)^-1 B + D`` evaluated at complex ``s``."""
    n = model.n
    X = np.linalg.solve(s * np.eye(n) - model.A, model.B.astype(complex))
    return model.C @ X + model.D


def rk4_step(model: StateSpaceModel, x, u, extra, dt) -> np.ndarray:
    """Advance ``xdot = A x + B u + extra`` by one RK4 step of length ``dt``.

    ``u`` and ``extra`` are held constant over the step (zero-order hold).
    """
    x = np.ascontiguousarray(x, dtype=float)
    c = model.B @ np.atleast_1d(np.asarray(u, dtype=float))
    if extra is not None:
        c = c + np.asarray(extra, dtype=float)
    return _backend.rk4_affine(model.A, x, np.ascontiguousarray(c), float(dt))


def simulate_zoh(model: StateSpaceModel, x0, u_seq, dt, extra_seq=None) -> np.ndarray:
    """Open-loop RK4 trajectory for a piecewise-constant input sequence.

    ``u_seq`` has one row (or scalar) per step; returns ``len(u_seq) + 1`` states.
    """
    u_seq = np.asarray(u_seq, dtype=float)
    if u_seq.ndim == 1:
        u_seq = u_seq[:, None]
    c_seq = u_seq @ model.B.T
    if extra_seq is not None:
        c_seq = c_seq + np.asarray(extra_seq, dtype=float)
    return _backend.rk4_affine_trajectory(
        model.A, np.ascontiguousarray(x0, dtype=float), np.ascontiguousarray(c_seq), float(dt)
    )


def output(model: StateSpaceModel, x, u) -> np.ndarray:
    """``y = C x + D u``."""
    return model.C @ np.asarray(x, dtype=float) + model.D @ np.atleast_1d(np.asarray(u, dtype=float))


def derivative_rows(model: StateSpaceModel, order: int) -> list[np.ndarray]:
    """Rows ``C A^k`` for ``k = 0..order`` (first output row only)."""
    rows = [model.C[0].copy()]
    for _ in range(order):
        rows.append(rows[-1] @ model.A)
    return rows


def output_derivatives(model: StateSpaceModel, x, u: float, order: int) -> list[float]:
    """Model-based ``[y, y', ..., y^(order)]`` for a strictly proper SISO model.

    ``u`` is treated as held, so its time derivatives do not appear:
    ``y^(k) = C A^k x + sum_{j<k} C A^(k-1-j) B u^(j)`` keeps only ``j = 0``.
    """
    x = np.asarray(x, dtype=float)
    b = model.B[:, 0]
    rows = derivative_rows(model, order)
    out = [float(rows[0] @ x)]
    for k in range(1, order + 1):
        out.append(float(rows[k] @ x + (rows[k - 1] @ b) * u))
    return out


def relative_degree(model: StateSpaceModel) -> int:
    """Smallest ``r`` with ``C A^(r-1) B != 0``; ``0`` if ``D != 0``."""
    if model.D[0, 0] != 0.0:
        return 0
    row = model.C[0]
    b = model.B[:, 0]
    for r in range(1, model.n + 1):
        if row @ b != 0.0:
            return r
        row = row @ model.A
    raise ValueError("model output does not depend on the input")
