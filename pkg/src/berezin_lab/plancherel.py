"""Plancherel-type densities and analytic-continuation coefficients.

The continuous spectral weight W(s) is a product of squared Gamma moduli
and pair interactions.  Continued below its natural parameter range it
spawns finitely many discrete blocks indexed by (r, u) through
w_j = u_1 + ... + u_j + j/2; each block carries a combinatorial factor C,
a Gamma-product factor V and a residual continuous density Q over the
remaining p - r spectral variables.  All Gamma products run through the
pole-aware arithmetic so that negative-integer degenerations reduce to
order bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iter_product
from math import factorial, pi

import numpy as np
from scipy.special import gammaln, loggamma

from .errors import InvalidParams, OracleVarianceTooHigh, PoleOnContour
from .gammaval import (
    GammaValue,
    from_real,
    from_real_snapped,
    gamma_value,
    nearest_nonpositive_int,
    one,
    pochhammer_value,
)
from .rngs import as_generator, derive_root_seed

_ZERO_TOL = 1e-12


@dataclass
class PlancherelParams:
    """Rank/weight parameters; ``h`` defaults to (p + q)/2 - 1."""

    p: int
    q: int
    alpha: float
    h: float | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.p <= self.q:
            raise InvalidParams(f"need 1 <= p <= q, got ({self.p}, {self.q})")
        if self.h is None:
            self.h = (self.p + self.q) / 2.0 - 1.0


@dataclass(frozen=True)
class BlockIndex:
    """Discrete block label (r, u) with its partial sums w."""

    r: int
    u: tuple[int, ...]
    w: tuple[float, ...]


def block_index(u) -> BlockIndex:
    u = tuple(int(x) for x in u)
    if any(x < 0 for x in u):
        raise InvalidParams("block labels are nonnegative integers")
    w = tuple(sum(u[: j + 1]) + (j + 1) / 2.0 for j in range(len(u)))
    return BlockIndex(len(u), u, w)


def surviving_blocks(params: PlancherelParams, strict: bool = True) -> list[BlockIndex]:
    """All blocks in the continued expansion at ``params.alpha``.

    The continuous block r = 0 is always present; a discrete block (r, u)
    survives when w_r < h - alpha (strict by default, weak inequality on
    request).  The list is finite because w_r >= r/2.
    """
    bound = params.h - params.alpha
    out = [block_index(())]
    for r in range(1, params.p + 1):
        slack = bound - r / 2.0
        top = int(np.floor(slack - 1e-9)) if strict else int(np.floor(slack + 1e-9))
        if top < 0:
            continue
        labels = [
            u for u in iter_product(range(top + 1), repeat=r) if sum(u) <= top
        ]
        labels.sort(key=lambda u: (sum(u), u))
        out.extend(block_index(u) for u in labels)
    return out


# ---------------------------------------------------------------------------
# Squared-modulus helpers (shared primitive of W and Q)
# ---------------------------------------------------------------------------


def _log_abs_gamma_sq(z: complex) -> float:
    """log |Gamma(z)|^2 for z off the pole set."""
    return 2.0 * float(np.real(loggamma(z)))


def _abs_gamma_sq_limit(x0: float, rate: float) -> GammaValue:
    """|Gamma(x0 + i rate eps)|^2 as eps -> 0, pole-aware in eps."""
    m = nearest_nonpositive_int(x0)
    if m is not None:
        mm = -m
        log_abs = -2.0 * float(gammaln(mm + 1)) - 2.0 * np.log(abs(rate))
        return GammaValue(log_abs, 1, pole_order=2)
    return GammaValue(2.0 * float(gammaln(x0)), 1)


def _inv_abs_gamma_sq_zero(rate: float) -> GammaValue:
    """1 / |Gamma(i rate eps)|^2 = (rate eps)^2 (1 + O(eps^2))."""
    return GammaValue(2.0 * np.log(abs(rate)), 1, zero_order=2)


def _abs_poch_sq_limit(base: float, m: int, rate: float) -> GammaValue:
    """|(base + i rate eps)_m|^2 as eps -> 0."""
    out = one()
    for i in range(m):
        x = base + i
        if abs(x) <= _ZERO_TOL:
            out = out * GammaValue(2.0 * np.log(abs(rate)), 1, zero_order=2)
        else:
            out = out * GammaValue(2.0 * np.log(abs(x)), 1)
    return out


def _log_abs_poch_sq(z: complex, m: int) -> float:
    total = 0.0
    for i in range(m):
        total += 2.0 * np.log(abs(z + i))
    return total


def _pair_interactions(s: np.ndarray) -> float:
    total = 1.0
    for k in range(s.size):
        for l in range(k + 1, s.size):
            dm, dp = s[k] - s[l], s[k] + s[l]
            total *= (s[k] ** 2 - s[l] ** 2) * np.tanh(pi * dm / 2.0) * np.tanh(pi * dp / 2.0)
    return float(total)


def _collapse(gv: GammaValue, where: str) -> float | None:
    """Finite value of a coordinate limit; None encodes an exact zero."""
    if gv.is_pole:
        raise PoleOnContour(f"net pole of order {gv.pole_order} at {where}")
    if gv.is_zero:
        return None
    return gv.log_abs


# ---------------------------------------------------------------------------
# Continuous weight (orthogonal case)
# ---------------------------------------------------------------------------


def continuous_weight_o(params: PlancherelParams, s) -> float:
    """The spectral weight W(s) over p real parameters, orthogonal case.

    Per coordinate: |Gamma((alpha - (p+q)/2 + 1 + i s)/2)|^2 times, when
    q > p, the ratio |Gamma((q-p)/2 + i s)|^2 / |Gamma(i s)|^2 (for q = p
    the ratio cancels identically); pairs contribute
    (s_k^2 - s_l^2) tanh(pi (s_k - s_l)/2) tanh(pi (s_k + s_l)/2).
    Coordinates at s = 0 are evaluated as limits: net zeros give an exact
    zero, net poles raise PoleOnContour.
    """
    p, q, alpha = params.p, params.q, params.alpha
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if s.shape != (p,):
        raise InvalidParams(f"need {p} spectral parameters, got shape {s.shape}")
    arg0 = (alpha - (p + q) / 2.0 + 1.0) / 2.0
    log_acc = 0.0
    for k in range(p):
        sk = float(s[k])
        if abs(sk) > _ZERO_TOL:
            log_acc += _log_abs_gamma_sq(arg0 + 0.5j * sk)
            if q > p:
                log_acc += _log_abs_gamma_sq((q - p) / 2.0 + 1j * sk)
                log_acc -= _log_abs_gamma_sq(1j * sk)
        else:
            gv = _abs_gamma_sq_limit(arg0, 0.5)
            if q > p:
                gv = gv * _abs_gamma_sq_limit((q - p) / 2.0, 1.0) * _inv_abs_gamma_sq_zero(1.0)
            piece = _collapse(gv, f"s[{k}] = 0")
            if piece is None:
                return 0.0
            log_acc += piece
    return float(np.exp(log_acc)) * _pair_interactions(s)


# ---------------------------------------------------------------------------
# Block coefficients (orthogonal case)
# ---------------------------------------------------------------------------


def coeff_C(u: BlockIndex, p: int) -> GammaValue:
    """Combinatorial block factor C over the label (r, u)."""
    r = u.r
    if r > p:
        raise InvalidParams(f"block rank {r} exceeds p = {p}")
    out = from_real(2.0 ** (p - r) * factorial(p) * (2.0 * pi) ** r / factorial(p - r))
    for uk in u.u:
        out = out * from_real((-1.0) ** uk / factorial(uk))
    for k in range(1, r + 1):
        w_prev = u.w[k - 2] if k >= 2 else 0.0
        for m in range(k + 1, r + 1):
            out = out * gamma_value(0.5 + u.w[m - 1] - u.w[k - 1])
            out = out / gamma_value(u.w[m - 1] - u.w[k - 1])
            out = out / pochhammer_value(0.5 + w_prev - u.w[m - 1], u.u[k - 1])
    return out


def coeff_V_o(alpha: float, u: BlockIndex, p: int, q: int) -> GammaValue:
    """Gamma-product block factor V, orthogonal case.

    Includes the 1/Gamma(alpha - m + 1) prefactor over m = 1..p, so the
    r = 0 block reproduces the continuous expansion's prefactor exactly
    and negative-integer alpha degenerations appear as net zero orders.
    """
    if u.r > p:
        raise InvalidParams(f"block rank {u.r} exceeds p = {p}")
    half = (p + q) / 2.0
    out = one()
    for m in range(1, p + 1):
        out = out / gamma_value(alpha - m + 1.0)
    for k in range(1, u.r + 1):
        wk = u.w[k - 1]
        w_prev = u.w[k - 2] if k >= 2 else 0.0
        out = out * gamma_value(alpha - p + 1.0 + 2.0 * wk)
        out = out * gamma_value(-alpha + q - 1.0 - 2.0 * wk)
        out = out / gamma_value(-alpha + half - 2.0 * wk)
        out = out / pochhammer_value(alpha - half + wk + w_prev + 0.5, u.u[k - 1])
    for k in range(1, u.r + 1):
        w_prev = u.w[k - 2] if k >= 2 else 0.0
        for m in range(k + 1, u.r + 1):
            wm = u.w[m - 1]
            wk = u.w[k - 1]
            out = out * gamma_value(0.5 - alpha + half - wk - wm)
            out = out / gamma_value(-alpha + half - wk - wm)
            out = out / pochhammer_value(alpha - half + wm + w_prev + 0.5, u.u[k - 1])
    return out


def coeff_Q_o(alpha: float, u: BlockIndex, s, p: int, q: int) -> float:
    """Residual continuous density Q over the p - r remaining parameters.

    Assembled factor by factor, independently of ``continuous_weight_o``;
    at r = 0 the two must agree, which is what the consistency check in
    the test-suite exercises.
    """
    r = u.r
    if r > p:
        raise InvalidParams(f"block rank {r} exceeds p = {p}")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if s.shape != (p - r,):
        raise InvalidParams(f"need {p - r} spectral parameters, got shape {s.shape}")
    half = (p + q) / 2.0
    wr = u.w[-1] if r else 0.0
    arg0 = (alpha - half + 1.0) / 2.0
    log_acc = 0.0
    for idx in range(p - r):
        sl = float(s[idx])
        if abs(sl) > _ZERO_TOL:
            log_acc += _log_abs_gamma_sq(arg0 + wr + 0.5j * sl)
            if q > p:
                log_acc += _log_abs_gamma_sq((q - p) / 2.0 + 1j * sl)
                log_acc -= _log_abs_gamma_sq(1j * sl)
            for k in range(1, r + 1):
                wk = u.w[k - 1]
                a_num = (1.0 - alpha + half - 2.0 * wk) / 2.0
                a_den = (-alpha + half - 2.0 * wk) / 2.0
                c0 = (alpha - half + wk) / 2.0
                log_acc += _log_abs_gamma_sq(a_num + 0.5j * sl)
                log_acc -= _log_abs_gamma_sq(a_den + 0.5j * sl)
                log_acc -= _log_abs_poch_sq(c0 + 0.5j * sl, u.u[k - 1])
        else:
            gv = _abs_gamma_sq_limit(arg0 + wr, 0.5)
            if q > p:
                gv = gv * _abs_gamma_sq_limit((q - p) / 2.0, 1.0) * _inv_abs_gamma_sq_zero(1.0)
            for k in range(1, r + 1):
                wk = u.w[k - 1]
                gv = gv * _abs_gamma_sq_limit((1.0 - alpha + half - 2.0 * wk) / 2.0, 0.5)
                gv = gv / _abs_gamma_sq_limit((-alpha + half - 2.0 * wk) / 2.0, 0.5)
                gv = gv / _abs_poch_sq_limit((alpha - half + wk) / 2.0, u.u[k - 1], 0.5)
            piece = _collapse(gv, f"s[{idx}] = 0")
            if piece is None:
                return 0.0
            log_acc += piece
    return float(np.exp(log_acc)) * _pair_interactions(s)


# ---------------------------------------------------------------------------
# Unitary case
# ---------------------------------------------------------------------------


def coeff_CVQ_u(alpha: float, w, s, p: int, q: int) -> tuple[GammaValue, GammaValue, float]:
    """Unitary-case block coefficients (C, V, Q) for integer labels w.

    Here the labels are plain nonnegative integers, repeated labels make C
    vanish through the squared Vandermonde, and the prefactor
    1/Gamma(alpha/2 - m + 1)^2 confines degeneration to even negative
    integers alpha.
    """
    w = tuple(int(x) for x in w)
    if any(x < 0 for x in w):
        raise InvalidParams("block labels are nonnegative integers")
    r = len(w)
    if r > p:
        raise InvalidParams(f"block rank {r} exceeds p = {p}")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if s.shape != (p - r,):
        raise InvalidParams(f"need {p - r} spectral parameters, got shape {s.shape}")

    c_val = from_real(2.0 ** (p - r) * factorial(p) * (2.0 * pi) ** r / factorial(p - r))
    for wk in w:
        c_val = c_val * from_real((-1.0) ** wk / factorial(wk))
    for k in range(r):
        for l in range(k + 1, r):
            c_val = c_val * from_real_snapped(float((w[k] - w[l]) ** 2))

    v_val = one()
    for m in range(1, p + 1):
        g = gamma_value(alpha / 2.0 - m + 1.0)
        v_val = v_val / (g * g)
    for wk in w:
        g1 = gamma_value(alpha / 2.0 - p + 1.0 + wk)
        g2 = gamma_value(-alpha / 2.0 + q - wk)
        v_val = v_val * g1 * g1 * g2 * g2
        v_val = v_val / gamma_value(-alpha + (p + q) - 1.0 + 2.0 * wk)
        v_val = v_val / pochhammer_value(alpha - (p + q) + 1.0 + wk, wk)
    for k in range(r):
        for l in range(k + 1, r):
            f = from_real_snapped(alpha - (p + q) + 1.0 + w[k] + w[l])
            v_val = v_val * f * f

    q_val = _unitary_q(alpha, w, s, p, q)
    return c_val, v_val, q_val


def _unitary_q(alpha: float, w: tuple[int, ...], s: np.ndarray, p: int, q: int) -> float:
    log_acc = 0.0
    shifts = [0.25 * (alpha - (p + q) + 1.0 + 2.0 * wk) ** 2 for wk in w]
    for idx in range(s.size):
        sn = float(s[idx])
        if abs(sn) > _ZERO_TOL:
            for shift in shifts:
                log_acc += 2.0 * np.log(shift + sn * sn)
            log_acc += 2.0 * _log_abs_gamma_sq((q - p + 1.0) / 2.0 + 0.5j * sn)
            log_acc += _log_abs_gamma_sq((alpha - p - q + 1.0) / 2.0 + 0.5j * sn)
            log_acc -= _log_abs_gamma_sq(1j * sn)
        else:
            gv = one()
            for shift in shifts:
                f = from_real_snapped(shift)
                gv = gv * f * f
            fin = _abs_gamma_sq_limit((q - p + 1.0) / 2.0, 0.5)
            gv = gv * fin * fin
            gv = gv * _abs_gamma_sq_limit((alpha - p - q + 1.0) / 2.0, 0.5)
            gv = gv * _inv_abs_gamma_sq_zero(1.0)
            piece = _collapse(gv, f"s[{idx}] = 0")
            if piece is None:
                return 0.0
            log_acc += piece
    total = float(np.exp(log_acc))
    for m in range(s.size):
        for n in range(m + 1, s.size):
            total *= float((s[n] ** 2 - s[m] ** 2) ** 2)
    return total


# ---------------------------------------------------------------------------
# Rank-one end-to-end probe
# ---------------------------------------------------------------------------


@dataclass
class Rank1Report:
    """Residuals of the inverted continuous expansion at rank one."""

    q: int
    alpha: float
    t_grid: np.ndarray
    residuals: np.ndarray
    max_residual: float
    normalization: float
    oracle_stderr: float
    seed: int


def rank1_plancherel_probe(
    q: int,
    alpha: float,
    t_grid=None,
    s_max: float = 25.0,
    n_quad: int = 201,
    rng=None,
    n_mc: int = 200_000,
    stderr_budget: float = 0.02,
) -> Rank1Report:
    """Check cosh(t)^(-alpha) against its continuous spectral resynthesis.

    At p = 1 the spherical functions have the one-dimensional integral
    representation phi_s(t) = E[(cosh t - x sinh t)^(-rho - i s)] with
    rho = (q - 1)/2 and x the first coordinate of a uniform point of the
    (q-1)-sphere.  The probe estimates phi on a common sample of x, pairs
    it with the continuous weight, integrates over [0, s_max], calibrates
    the constant at t = 0 and reports relative residuals on the grid.
    """
    if q < 2:
        raise InvalidParams("need q >= 2")
    if alpha <= (1 + q) / 2.0 - 1.0:
        raise InvalidParams("the purely continuous expansion needs alpha > (1+q)/2 - 1")
    if n_quad < 5 or n_quad % 2 == 0:
        raise InvalidParams("n_quad must be odd and at least 5")
    from scipy.integrate import simpson

    t_grid = np.asarray([0.5, 1.0, 1.5] if t_grid is None else t_grid, dtype=float)
    seed = derive_root_seed(rng)
    gen = as_generator(seed)
    rho = (q - 1) / 2.0
    x = 2.0 * gen.beta((q - 1) / 2.0, (q - 1) / 2.0, size=n_mc) - 1.0
    s = np.linspace(0.0, s_max, n_quad)
    params = PlancherelParams(1, q, alpha)
    weight = np.array([continuous_weight_o(params, [sv]) for sv in s])

    def synth(t: float) -> tuple[float, float]:
        base = np.cosh(t) - x * np.sinh(t)
        wmc = base ** (-rho)
        v = np.log(base)
        phi = np.empty_like(s)
        for lo in range(0, s.size, 16):
            chunk = s[lo : lo + 16, None]
            phi[lo : lo + 16] = np.mean(wmc[None, :] * np.cos(chunk * v[None, :]), axis=1)
        rel_err = float(np.std(wmc) / np.sqrt(n_mc) / max(np.mean(wmc), 1e-30))
        return float(simpson(weight * phi, x=s)), rel_err

    base_int, err0 = synth(0.0)
    if err0 > stderr_budget:
        raise OracleVarianceTooHigh(f"calibration stderr {err0:.4f} exceeds {stderr_budget}")
    norm = 1.0 / base_int
    residuals = np.empty_like(t_grid)
    worst_err = err0
    for i, t in enumerate(t_grid):
        integral, err = synth(float(t))
        worst_err = max(worst_err, err)
        if err > stderr_budget:
            raise OracleVarianceTooHigh(f"stderr {err:.4f} at t = {t} exceeds {stderr_budget}")
        target = np.cosh(t) ** (-alpha)
        residuals[i] = abs(norm * integral - target) / target
    return Rank1Report(
        q=q,
        alpha=alpha,
        t_grid=t_grid,
        residuals=residuals,
        max_residual=float(residuals.max()),
        normalization=norm,
        oracle_stderr=worst_err,
        seed=seed,
    )
