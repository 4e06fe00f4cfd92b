"""Performance and chattering metrics over a :class:`~torpedo_smc.sim.RunLog`."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .controllers import Smc1Config
from .lti import derivative_rows


def total_variation(series) -> float:
    """``sum |u[i+1] - u[i]|``; the chattering index."""
    a = np.asarray(series, dtype=float)
    if a.size == 0:
        raise ValueError("empty series")
    return float(np.abs(np.diff(a)).sum())


def switch_count(series, deadband: float = 0.0) -> int:
    """Sign changes after values with ``|x| <= deadband`` are zeroed and dropped."""
    if deadband < 0:
        raise ValueError("deadband must be >= 0")
    a = np.asarray(series, dtype=float)
    signs = np.sign(np.where(np.abs(a) <= deadband, 0.0, a))
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def settling_time(y, r, band_fraction: float, t) -> Optional[float]:
    """Earliest grid time after which ``|y - r| <= band * |r_final|`` holds to the end.

    Returns ``None`` when the last sample is still outside the band. With a
    zero final reference the band is taken relative to the initial error.
    """
    if not 0 < band_fraction < 1:
        raise ValueError("band_fraction must be in (0, 1)")
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    scale = abs(r[-1]) or abs(r[0] - y[0])
    err = np.abs(y - r)
    outside = np.flatnonzero(~(err <= band_fraction * scale))
    if outside.size == 0:
        return float(t[0])
    last = outside[-1]
    if last == y.size - 1:
        return None
    return float(t[last + 1])


def first_reach_index(s, delta: float) -> Optional[int]:
    """First sample with ``|s| <= delta`` or a sign change from ``s[0]``.

    The sign change catches sampled trajectories that jump across the band.
    """
    s = np.asarray(s, dtype=float)
    if s.size == 0:
        return None
    s0 = np.sign(s[0])
    hit = (np.abs(s) <= delta) | (np.sign(s) != s0)
    idx = np.flatnonzero(hit)
    return int(idx[0]) if idx.size else None


def reaching_compliance(s, s_dot, eta: float, delta: float, t=None) -> tuple[Optional[float], float]:
    """``(first_reach_time, violation_fraction)`` for ``s s' <= -eta |s|``.

    A pre-reach sample violates when ``s s' > -eta |s| + tol`` with
    ``tol = 1e-9 + 1e-6 |s|``. ``t`` defaults to the sample index.
    """
    s = np.asarray(s, dtype=float)
    s_dot = np.asarray(s_dot, dtype=float)
    if s.shape != s_dot.shape:
        raise ValueError("s and s_dot must be aligned")
    t = np.arange(s.size, dtype=float) if t is None else np.asarray(t, dtype=float)
    idx = first_reach_index(s, delta)
    end = s.size if idx is None else idx
    pre_s, pre_sd = s[:end], s_dot[:end]
    if end == 0:
        frac = 0.0
    else:
        tol = 1e-9 + 1e-6 * np.abs(pre_s)
        frac = float(np.mean(pre_s * pre_sd > -eta * np.abs(pre_s) + tol))
    return (None if idx is None else float(t[idx])), frac


def rms(series) -> float:
    a = np.asarray(series, dtype=float)
    if a.size == 0:
        raise ValueError("empty series")
    return float(np.sqrt(np.mean(a * a)))


def overshoot(y, r) -> float:
    """Largest excursion beyond ``r_final`` in the step direction, in % of ``|r_final|``."""
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=float)
    if y.size == 0:
        raise ValueError("empty series")
    rf = r[-1]
    if rf == 0:
        return 0.0
    peak = np.max((y - rf) * np.sign(rf))
    return float(max(0.0, peak) / abs(rf) * 100.0)


def steady_state_error(y, r, tail_fraction: float = 0.1) -> float:
    """Mean ``|r - y|`` over the final ``tail_fraction`` of the samples."""
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=float)
    if y.size == 0:
        raise ValueError("empty series")
    n_tail = max(1, int(round(tail_fraction * y.size)))
    return float(np.mean(np.abs(r[-n_tail:] - y[-n_tail:])))


def central_difference(series, dt: float) -> np.ndarray:
    """Central differences inside, one-sided at the ends."""
    return np.gradient(np.asarray(series, dtype=float), dt)


def surface_rate(log, control=None) -> np.ndarray:
    """Model-based ``s'`` at each sample, using the control held after the sample.

    Uses the same state source as the controller (the estimate when the
    observer is in the loop) and the nominal model, so the disturbance is
    not included. Passing ``control`` (e.g. the previous interval's inputs)
    gives the derivative on the other side of a sample.
    """
    from .sim import build_plant, surface_coefficients

    sc = log.scenario
    if sc is None:
        raise ValueError("log carries no scenario")
    model = build_plant(sc).active
    coeffs = surface_coefficients(sc.controller)
    order = len(coeffs)
    rows = derivative_rows(model, order)
    b = model.B[:, 0]
    z = log.xhat if (sc.observer is not None and sc.observer.in_loop) else log.x
    u = log.u if control is None else np.asarray(control, dtype=float)
    rate = np.zeros(len(log))
    for j, c in enumerate(coeffs):
        k = j + 1  # derivative order of y entering s'
        y_k = z @ rows[k] + (rows[k - 1] @ b) * u
        r_k = np.array([sc.reference.derivatives(t, k)[k] for t in log.t])
        rate += c * (r_k - y_k)
    return rate


def state_error_norm(log) -> np.ndarray:
    if log.xhat is None:
        raise ValueError("log has no observer trace")
    return np.linalg.norm(log.x - log.xhat, axis=1)


def convergence_time(log, fraction: float = 0.02) -> Optional[float]:
    """Earliest time after which ``|x - x_hat| <= fraction * max_t |x|`` holds."""
    err = state_error_norm(log)
    peak = float(np.max(np.linalg.norm(log.x, axis=1)))
    outside = np.flatnonzero(err > fraction * peak)
    if outside.size == 0:
        return float(log.t[0])
    if outside[-1] == len(log) - 1:
        return None
    return float(log.t[outside[-1] + 1])


def reach_delta(cfg) -> float:
    if isinstance(cfg, Smc1Config) and cfg.boundary_layer > 0:
        return cfg.boundary_layer
    return 1e-4


@dataclass(frozen=True)
class MetricsReport:
    """Per-run summary; ``None`` means not settled / not reached / no observer.

    Chattering (``total_variation_u``, ``switch_count``) is measured over
    the post-reach window, with a switch deadband of 1% of ``max |u|``.
    """

    total_variation_u: float
    switch_count: int
    settling_time: Optional[float]
    overshoot_pct: float
    steady_state_error: float
    reaching_time: Optional[float]
    reaching_violations: float
    observer_rms_error: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def metrics_report(log, band_fraction: float = 0.02, tail_fraction: float = 0.1) -> MetricsReport:
    sc = log.scenario
    cfg = sc.controller
    eta = cfg.eta if isinstance(cfg, Smc1Config) else 0.0
    delta = reach_delta(cfg)
    reach_t, viol = reaching_compliance(log.s, surface_rate(log), eta, delta, log.t)
    idx = first_reach_index(log.s, delta)
    post = log.u[idx:] if idx is not None else log.u[:0]
    deadband = 0.01 * float(np.max(np.abs(log.u)))
    return MetricsReport(
        total_variation_u=total_variation(post) if post.size else 0.0,
        switch_count=switch_count(post, deadband),
        settling_time=settling_time(log.y, log.r, band_fraction, log.t),
        overshoot_pct=overshoot(log.y, log.r),
        steady_state_error=steady_state_error(log.y, log.r, tail_fraction),
        reaching_time=reach_t,
        reaching_violations=viol,
        observer_rms_error=rms(log.eps) if log.eps is not None else None,
    )


def format_value(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}" if math.isfinite(v) else str(v)
    return str(v)
