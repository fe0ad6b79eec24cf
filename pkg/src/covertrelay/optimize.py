"""Covert-throughput maximization under covertness/reliability/power budgets.

Single-antenna: first-order (KKT) stationarity with active-set
enumeration, seeded from a coarse feasibility scan, with a dense-grid
fallback.  Multi-antenna: a feasibility-filtered triple grid scan with
early exit once the rate loop has passed its peak.

The power grids are logarithmically spaced by default: under a tight
covertness budget the feasible powers live several decades below P_max,
where a linear grid of any practical size has no points at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detection import min_dep_slot, min_dep_two_hop
from .errors import InfeasibleError, NumericError
from .model import ConstraintSet, RateParams, SystemParams
from .specfun import ei_diff, expint_ei_scaled
from .throughput import outage_hop_multi_reference, throughput_single

__all__ = [
    "Optimum",
    "KktPoint",
    "lagrangian_gradient",
    "optimize_single",
    "optimize_multi",
    "covert_power_limit",
]

_FEAS_SLACK = 1e-9
_ACTIVITY_TOL = 1e-6
# Lowest power considered by the scans, as a fraction of P_max; six
# decades comfortably brackets the covertness-limited regime.
_POWER_SPAN = 1e-6
_T_SCAN_LO, _T_SCAN_HI = 1e-3, 4.0


@dataclass(frozen=True)
class Optimum:
    """A verified-feasible solution of a throughput maximization run."""

    p_s: float
    p_r: float
    t: float
    eta: float
    active_constraints: frozenset = field(default_factory=frozenset)
    method: str = "grid"

    def __post_init__(self) -> None:
        if self.p_s <= 0 or self.p_r <= 0 or self.t < 0 or self.eta < 0:
            raise ValueError("optimum fields must be positive (t, eta nonnegative)")
        allowed = {"covertness", "reliability", "power_s", "power_r"}
        if not set(self.active_constraints) <= allowed:
            raise ValueError(f"unknown active constraints: {set(self.active_constraints) - allowed}")
        if self.method not in ("kkt", "grid"):
            raise ValueError(f"method must be 'kkt' or 'grid', got {self.method!r}")


@dataclass(frozen=True)
class KktPoint:
    """A stationary point with its multipliers and residual norm."""

    p_s: float
    p_r: float
    t: float
    k1: float
    k2: float
    k3: float
    k4: float
    residual_norm: float

    def __post_init__(self) -> None:
        if self.residual_norm < 0:
            raise ValueError("residual_norm must be >= 0")


# ---------------------------------------------------------------------------
# Single-antenna objective/constraint surface and its analytic gradient.
# ---------------------------------------------------------------------------


def _ei_gap(p: float, kappa: float, params: SystemParams) -> float:
    # G(p) = Ei(-kappa mu2 / p) - Ei(-kappa mu1 / p) > 0; 1 - p_out = G / (2 ln rho).
    return ei_diff(kappa * params.mu2 / p, kappa * params.mu1 / p)


def _ei_gap_dp(p: float, kappa: float, params: SystemParams) -> float:
    return (math.exp(-kappa * params.mu1 / p) - math.exp(-kappa * params.mu2 / p)) / p


def _ei_gap_dkappa(p: float, kappa: float, params: SystemParams) -> float:
    return (math.expm1(-kappa * params.mu2 / p) - math.expm1(-kappa * params.mu1 / p)) / kappa


def _dep_gap(p: float, params: SystemParams) -> float:
    # B(p) = e^{-mu2/p} [Ei(mu2/p) - Ei(mu1/p)]; 1 - Pe* = B / (2 ln rho).
    u, v = params.mu2 / p, params.mu1 / p
    return expint_ei_scaled(u) - math.exp(v - u) * expint_ei_scaled(v)


def _dep_gap_dp(p: float, params: SystemParams) -> float:
    b = _dep_gap(p, params)
    return (params.mu2 / p**2) * b + (math.exp((params.mu1 - params.mu2) / p) - 1.0) / p


def _surface(p_s: float, p_r: float, t: float, params: SystemParams):
    """(eta, p_out, xi_star) of the single-antenna scenario at a point."""
    base = params.with_powers(p_s, p_r)
    out = throughput_single(base, RateParams(t))
    return out.eta, out.p_out, min_dep_two_hop(base)


def _lagrangian_value(x, mult, constraints: ConstraintSet, params: SystemParams) -> float:
    p_s, p_r, t = x
    k1, k2, k3, k4 = mult
    eta, p_out, xi = _surface(p_s, p_r, t, params)
    return (
        -eta
        + k1 * (1.0 - constraints.epsilon - xi)
        + k2 * (p_out - constraints.delta)
        + k3 * (p_s - constraints.p_max)
        + k4 * (p_r - constraints.p_max)
    )


def lagrangian_gradient(
    p_s: float,
    p_r: float,
    t: float,
    multipliers,
    constraints: ConstraintSet,
    params: SystemParams,
    debug: bool = False,
):
    """Partials of the Lagrangian of the single-antenna problem.

    Returns (dL/dp_s, dL/dp_r, dL/dt) at an interior point, from analytic
    differentiation of the validated throughput and DEP expressions.  In
    debug mode each partial is cross-checked against a central finite
    difference and a disagreement beyond 1e-4 relative raises.
    """
    if p_s <= 0 or p_r <= 0 or t <= 0:
        raise ValueError("lagrangian_gradient needs a strictly interior point")
    k1, k2, k3, k4 = (float(m) for m in multipliers)
    kappa = RateParams(t).kappa
    c = 4.0 * math.log(params.rho) ** 2
    g1, g2 = _ei_gap(p_s, kappa, params), _ei_gap(p_r, kappa, params)
    dg1, dg2 = _ei_gap_dp(p_s, kappa, params), _ei_gap_dp(p_r, kappa, params)
    b1, b2 = _dep_gap(p_s, params), _dep_gap(p_r, params)
    db1, db2 = _dep_gap_dp(p_s, params), _dep_gap_dp(p_r, params)
    dkappa_dt = 2.0 ** (2.0 * t) * 2.0 * math.log(2.0)
    dgk1 = _ei_gap_dkappa(p_s, kappa, params)
    dgk2 = _ei_gap_dkappa(p_r, kappa, params)

    # eta = t G1 G2 / c;  p_out = 1 - G1 G2 / c;  xi* = 1 - B1 B2 / c.
    d_ps = -t * dg1 * g2 / c + k1 * db1 * b2 / c - k2 * dg1 * g2 / c + k3
    d_pr = -t * g1 * dg2 / c + k1 * b1 * db2 / c - k2 * g1 * dg2 / c + k4
    dprod_dt = (dgk1 * g2 + g1 * dgk2) * dkappa_dt
    d_t = -(g1 * g2 + t * dprod_dt) / c - k2 * dprod_dt / c

    grad = (d_ps, d_pr, d_t)
    if debug:
        x0 = np.array([p_s, p_r, t], dtype=float)
        mult = (k1, k2, k3, k4)
        for i, analytic in enumerate(grad):
            h = 1e-6 * max(abs(x0[i]), 1e-6)
            hi, lo = x0.copy(), x0.copy()
            hi[i] += h
            lo[i] -= h
            fd = (
                _lagrangian_value(hi, mult, constraints, params)
                - _lagrangian_value(lo, mult, constraints, params)
            ) / (2.0 * h)
            # The central difference carries ~eps/h of rounding noise, so
            # negligible components need an absolute slack as well.
            scale = max(abs(analytic), abs(fd), 1e-9)
            if abs(analytic - fd) > 1e-4 * scale + 1e-7:
                raise NumericError(
                    f"gradient component {i}: analytic {analytic} vs finite diff {fd}"
                )
    return grad


# ---------------------------------------------------------------------------
# Feasibility helpers.
# ---------------------------------------------------------------------------


def _feasible(p_s, p_r, t, constraints, params, slack=_FEAS_SLACK):
    eta, p_out, xi = _surface(p_s, p_r, t, params)
    checks = {
        "covertness": xi - (1.0 - constraints.epsilon),
        "reliability": constraints.delta - p_out,
        "power_s": constraints.p_max - p_s,
        "power_r": constraints.p_max - p_r,
    }
    ok = all(v >= -slack for v in checks.values())
    return ok, eta, checks


def covert_power_limit(epsilon: float, params: SystemParams, p_max: float) -> float:
    """Largest equal per-hop power keeping the two-hop DEP above 1 - epsilon.

    Bisection on the monotone-decreasing DEP; returns p_max itself when
    even full power stays covert.
    """
    target = 1.0 - epsilon

    def xi_at(p: float) -> float:
        return min_dep_two_hop(params.with_powers(p, p))

    if xi_at(p_max) >= target:
        return p_max
    lo = p_max * 1e-12
    if xi_at(lo) < target:
        raise InfeasibleError(
            "covertness constraint unsatisfiable even at vanishing power", "covertness"
        )
    hi = p_max
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if xi_at(mid) >= target:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-14:
            break
    return lo


def _coarse_scan(constraints: ConstraintSet, params: SystemParams, n: int = 20):
    p_grid = np.geomspace(constraints.p_max * _POWER_SPAN, constraints.p_max, n)
    t_grid = np.geomspace(_T_SCAN_LO, _T_SCAN_HI, n)
    best = None
    for p_s in p_grid:
        # Covertness depends only on the powers; prune before the t loop.
        for p_r in p_grid:
            xi = min_dep_two_hop(params.with_powers(float(p_s), float(p_r)))
            if xi < 1.0 - constraints.epsilon - _FEAS_SLACK:
                continue
            for t in t_grid:
                ok, eta, _ = _feasible(float(p_s), float(p_r), float(t), constraints, params)
                if ok and (best is None or eta > best[0]):
                    best = (eta, float(p_s), float(p_r), float(t))
    return best


# ---------------------------------------------------------------------------
# KKT active-set solver.
# ---------------------------------------------------------------------------

_CONSTRAINTS = ("covertness", "reliability", "power_s", "power_r")


def _kkt_residual(z, active, constraints, params):
    """Stationarity (elasticity-scaled) plus active-constraint equalities.

    z = (log p_s, log p_r, log t, multipliers of active constraints).
    """
    p_s, p_r, t = (math.exp(v) for v in z[:3])
    mult = dict.fromkeys(_CONSTRAINTS, 0.0)
    for name, m in zip(active, z[3:]):
        mult[name] = m
    grad = lagrangian_gradient(
        p_s, p_r, t,
        (mult["covertness"], mult["reliability"], mult["power_s"], mult["power_r"]),
        constraints, params,
    )
    eta, p_out, xi = _surface(p_s, p_r, t, params)
    res = [grad[0] * p_s, grad[1] * p_r, grad[2] * t]
    gaps = {
        "covertness": xi - (1.0 - constraints.epsilon),
        "reliability": constraints.delta - p_out,
        "power_s": (constraints.p_max - p_s) / constraints.p_max,
        "power_r": (constraints.p_max - p_r) / constraints.p_max,
    }
    for name in active:
        res.append(gaps[name])
    return np.array(res), mult, (eta, p_out, xi)


def _newton_solve(z0, active, constraints, params, max_iter=200, tol=1e-10):
    z = np.array(z0, dtype=float)
    res, _, _ = _kkt_residual(z, active, constraints, params)
    norm = float(np.max(np.abs(res)))
    for _ in range(max_iter):
        if norm <= tol:
            break
        n = len(z)
        jac = np.empty((n, n))
        for i in range(n):
            h = 1e-7 * max(abs(z[i]), 1.0)
            zp, zm = z.copy(), z.copy()
            zp[i] += h
            zm[i] -= h
            rp, _, _ = _kkt_residual(zp, active, constraints, params)
            rm, _, _ = _kkt_residual(zm, active, constraints, params)
            jac[:, i] = (rp - rm) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            return None
        damping = 1.0
        improved = False
        for _ in range(40):
            z_try = z + damping * step
            if not np.all(np.isfinite(z_try)) or np.any(z_try[:3] > 50) or np.any(z_try[:3] < -80):
                damping *= 0.5
                continue
            try:
                res_try, _, _ = _kkt_residual(z_try, active, constraints, params)
            except (ValueError, ArithmeticError, OverflowError):
                damping *= 0.5
                continue
            norm_try = float(np.max(np.abs(res_try)))
            if norm_try < norm:
                z, res, norm = z_try, res_try, norm_try
                improved = True
                break
            damping *= 0.5
        if not improved:
            break
    return z, norm


def _fine_grid(constraints: ConstraintSet, params: SystemParams, n: int = 60):
    p_grid = np.geomspace(constraints.p_max * _POWER_SPAN, constraints.p_max, n)
    t_grid = np.geomspace(_T_SCAN_LO, _T_SCAN_HI, n)
    best = None
    for p_s in p_grid:
        for p_r in p_grid:
            xi = min_dep_two_hop(params.with_powers(float(p_s), float(p_r)))
            if xi < 1.0 - constraints.epsilon - _FEAS_SLACK:
                continue
            for t in t_grid:
                ok, eta, _ = _feasible(float(p_s), float(p_r), float(t), constraints, params)
                if not ok:
                    continue
                key = (eta, -float(p_s), -float(p_r), -float(t))
                if best is None or key > best[0]:
                    best = (key, float(p_s), float(p_r), float(t), eta)
    return best


def optimize_single(constraints: ConstraintSet, params_template: SystemParams) -> Optimum:
    """Maximize single-antenna covert throughput over (p_s, p_r, t).

    Enumerates active/inactive patterns of the four inequality
    constraints, solves each pattern's stationarity system by damped
    Newton from the best coarse-scan point, and returns the best
    converged feasible candidate; falls back to a fine grid scan when no
    pattern converges.
    """
    params = params_template
    start = _coarse_scan(constraints, params)
    if start is None:
        # The log grid can straddle a narrow feasible sliver; probe the
        # covertness-limited corner directly before declaring infeasibility.
        try:
            p_cov = covert_power_limit(constraints.epsilon, params, constraints.p_max)
        except InfeasibleError:
            raise
        probe = None
        for t in np.geomspace(_T_SCAN_LO, _T_SCAN_HI, 200):
            ok, eta, _ = _feasible(p_cov, p_cov, float(t), constraints, params)
            if ok and (probe is None or eta > probe[0]):
                probe = (eta, p_cov, p_cov, float(t))
        if probe is None:
            raise InfeasibleError(
                "no feasible point found by the coarse scan or the covertness-corner probe",
                "reliability",
            )
        start = probe
    start_eta, ps0, pr0, t0 = start

    best_candidate = None
    for pattern in range(16):
        active = tuple(name for i, name in enumerate(_CONSTRAINTS) if pattern >> i & 1)
        z0 = [math.log(ps0), math.log(pr0), math.log(t0)] + [1e-2] * len(active)
        try:
            solved = _newton_solve(z0, active, constraints, params)
        except (ValueError, ArithmeticError, OverflowError):
            continue
        if solved is None:
            continue
        z, norm = solved
        if norm > 1e-8:
            continue
        res, mult, (eta, p_out, xi) = _kkt_residual(z, active, constraints, params)
        if any(mult[name] < -1e-10 for name in active):
            continue
        p_s, p_r, t = (math.exp(v) for v in z[:3])
        ok, eta, _gaps = _feasible(p_s, p_r, t, constraints, params)
        if not ok:
            continue
        point = KktPoint(p_s, p_r, t, mult["covertness"], mult["reliability"],
                         mult["power_s"], mult["power_r"], norm)
        if best_candidate is None or eta > best_candidate[0]:
            best_candidate = (eta, point, frozenset(active))

    # A converged pattern can still be a spurious stationary point (e.g.
    # the degenerate t -> 0 corner); never return anything worse than the
    # feasible scan point that seeded the solves.
    if best_candidate is not None and best_candidate[0] >= start_eta - 1e-12:
        eta, point, active = best_candidate
        return Optimum(point.p_s, point.p_r, point.t, eta, active, method="kkt")

    fine = _fine_grid(constraints, params)
    if fine is None:
        raise InfeasibleError("feasible region empty on the fine grid", "covertness")
    _, p_s, p_r, t, eta = fine
    return Optimum(p_s, p_r, t, eta, _active_set(p_s, p_r, t, constraints, params), method="grid")


def _active_set(p_s, p_r, t, constraints, params) -> frozenset:
    _, _, gaps = _feasible(p_s, p_r, t, constraints, params)
    scales = {
        "covertness": max(constraints.epsilon, 1e-12),
        "reliability": max(constraints.delta, 1e-12),
        "power_s": constraints.p_max,
        "power_r": constraints.p_max,
    }
    return frozenset(n for n, gap in gaps.items() if abs(gap) <= _ACTIVITY_TOL * scales[n])


# ---------------------------------------------------------------------------
# Multi-antenna grid search.
# ---------------------------------------------------------------------------


def optimize_multi(
    constraints: ConstraintSet,
    params_template: SystemParams,
    steps: tuple | None = None,
    phi: float = 1e-6,
    v_max: int = 10**6,
    evaluations: list | None = None,
) -> Optimum:
    """Maximize multi-antenna covert throughput by a filtered grid scan.

    Power axes default to 100-point log grids over six decades below
    P_max (linear steps can be requested via `steps = (h1, h2, h3)`);
    the rate axis climbs in steps of h3 and exits once the outage budget
    is exhausted or the running peak has been passed by more than phi.
    If `evaluations` is a list, every feasible evaluated point is
    appended to it as (p_s, p_r, t, eta).
    """
    if phi <= 0:
        raise ValueError(f"phi must be > 0, got {phi}")
    if v_max < 1:
        raise ValueError(f"v_max must be >= 1, got {v_max}")
    params = params_template
    ant = params.antennas
    p_max = constraints.p_max
    if steps is None:
        ps_grid = pr_grid = np.geomspace(p_max * _POWER_SPAN, p_max, 100)
        h3 = 0.01
    else:
        h1, h2, h3 = steps
        if h1 <= 0 or h2 <= 0 or h3 <= 0:
            raise ValueError(f"step sizes must be > 0, got {steps}")
        ps_grid = np.arange(h1, p_max * (1 + 1e-12), h1)
        pr_grid = np.arange(h2, p_max * (1 + 1e-12), h2)

    slot_dep = {}

    def dep(p: float) -> float:
        if p not in slot_dep:
            slot_dep[p] = min_dep_slot(p, params)
        return slot_dep[p]

    best = None
    v = 0
    saw_covert = False
    saw_reliable = False
    stop = False
    for p_s in ps_grid:
        p_s = float(p_s)
        if stop:
            break
        for p_r in pr_grid:
            p_r = float(p_r)
            xi = 1.0 - (1.0 - dep(p_s)) * (1.0 - dep(p_r))
            if xi < 1.0 - constraints.epsilon:
                continue
            saw_covert = True
            peak = -math.inf
            t = h3
            while True:
                rate = RateParams(t)
                hop1 = outage_hop_multi_reference(p_s, rate, params, ant.n_s, ant.n_rr)
                hop2 = outage_hop_multi_reference(p_r, rate, params, ant.n_rt, ant.n_d)
                p_out = 1.0 - (1.0 - hop1) * (1.0 - hop2)
                if p_out > constraints.delta:
                    break
                saw_reliable = True
                eta = t * (1.0 - p_out)
                v += 1
                if evaluations is not None:
                    evaluations.append((p_s, p_r, t, eta))
                key = (eta, -p_s, -p_r, -t)
                if best is None or key > best[0]:
                    best = (key, p_s, p_r, t, eta)
                peak = max(peak, eta)
                if v >= v_max:
                    stop = True
                    break
                if eta + phi < peak:
                    break
                t += h3
            if stop:
                break

    if best is None:
        tightest = "covertness" if not saw_covert else "reliability"
        raise InfeasibleError(
            f"no grid point satisfies the constraints (tightest: {tightest})", tightest
        )
    _, p_s, p_r, t, eta = best
    return Optimum(p_s, p_r, t, eta,
                   _active_set_multi(p_s, p_r, t, constraints, params), method="grid")


def _active_set_multi(p_s, p_r, t, constraints, params) -> frozenset:
    ant = params.antennas
    rate = RateParams(t)
    xi = min_dep_two_hop(params.with_powers(p_s, p_r))
    hop1 = outage_hop_multi_reference(p_s, rate, params, ant.n_s, ant.n_rr)
    hop2 = outage_hop_multi_reference(p_r, rate, params, ant.n_rt, ant.n_d)
    p_out = 1.0 - (1.0 - hop1) * (1.0 - hop2)
    gaps = {
        "covertness": xi - (1.0 - constraints.epsilon),
        "reliability": constraints.delta - p_out,
        "power_s": constraints.p_max - p_s,
        "power_r": constraints.p_max - p_r,
    }
    scales = {
        "covertness": max(constraints.epsilon, 1e-12),
        "reliability": max(constraints.delta, 1e-12),
        "power_s": constraints.p_max,
        "power_r": constraints.p_max,
    }
    return frozenset(n for n, gap in gaps.items() if abs(gap) <= _ACTIVITY_TOL * scales[n])
