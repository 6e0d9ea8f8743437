"""ARIMA / SARIMA / SARIMAX by conditional sum of squares.

Estimation minimizes the sum of squared one-step residuals (pre-sample
residuals initialized to zero) with Nelder-Mead, plus a barrier that keeps
every AR/MA characteristic root outside the unit circle. Order selection is
AIC over a grid; evaluation is one-step rolling without refitting.
"""

from __future__ import annotations

import datetime as dt
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import DataError
from .optim import OptimizerError, nelder_mead

ROOT_MARGIN = 1.001
_PENALTY_WEIGHT = 1e6


class FitError(RuntimeError):
    """A model could not be estimated (optimizer failure or invalid roots)."""


@dataclass(frozen=True)
class ArimaOrder:
    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 0

    def __post_init__(self):
        if min(self.p, self.d, self.q, self.P, self.D, self.Q, self.s) < 0:
            raise ValueError("order components must be non-negative")
        seasonal = self.P or self.D or self.Q
        if (self.s == 0) != (not seasonal):
            raise ValueError("s = 0 exactly when P = D = Q = 0")
        if self.d + self.D > 2:
            raise ValueError("d + D must be <= 2")
        if self.p > 3 or self.q > 3:
            raise ValueError("p and q must be <= 3")
        if self.P > 1 or self.Q > 1:
            raise ValueError("P and Q must be <= 1")

    @property
    def tuple(self) -> tuple[int, ...]:
        return (self.p, self.d, self.q, self.P, self.D, self.Q, self.s)

    @property
    def max_ar_lag(self) -> int:
        return self.p + self.s * self.P

    @property
    def max_ma_lag(self) -> int:
        return self.q + self.s * self.Q

    @property
    def diff_span(self) -> int:
        return self.d + self.s * self.D

    def n_coeffs(self) -> int:
        return self.p + self.q + self.P + self.Q

    def __str__(self):
        base = f"({self.p},{self.d},{self.q})"
        if self.s:
            base += f"({self.P},{self.D},{self.Q})[{self.s}]"
        return base


@dataclass(frozen=True)
class ExogSpec:
    """Exogenous regressors: none, or week-of-year Fourier harmonics."""

    kind: str = "none"  # "none" | "fourier"
    K: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "fourier"):
            raise ValueError(f"unknown exog kind {self.kind!r}")
        if self.kind == "fourier" and self.K < 1:
            raise ValueError("fourier exog needs K >= 1")

    @property
    def n_columns(self) -> int:
        return 2 * self.K if self.kind == "fourier" else 0


NO_EXOG = ExogSpec()


def fourier_exog(dates, K: int) -> np.ndarray:
    """2K columns of sin/cos(2*pi*k*week_of_year/52), k = 1..K."""
    if K < 1:
        raise ValueError("K must be >= 1")
    weeks = np.array([d.isocalendar()[1] for d in dates], dtype=np.float64)
    cols = []
    for k in range(1, K + 1):
        angle = 2.0 * np.pi * k * weeks / 52.0
        cols.append(np.sin(angle))
        cols.append(np.cos(angle))
    return np.column_stack(cols)


def make_exog(spec: ExogSpec, dates) -> np.ndarray | None:
    if spec.kind == "none":
        return None
    if dates is None:
        raise ValueError("fourier exog needs dates")
    return fourier_exog(dates, spec.K)


def difference(values, d: int, D: int = 0, s: int = 0) -> np.ndarray:
    """Apply (1-B)^d (1-B^s)^D; output shrinks by d + s*D points."""
    x = np.asarray(values, dtype=np.float64)
    span = d + s * D
    if len(x) <= span:
        raise DataError(f"series of length {len(x)} too short to difference "
                        f"(needs > {span})")
    for _ in range(d):
        x = x[1:] - x[:-1]
    for _ in range(D):
        x = x[s:] - x[:-s]
    return x


def diff_polynomial(d: int, D: int, s: int) -> np.ndarray:
    """Ascending coefficients of (1-B)^d (1-B^s)^D (index = lag)."""
    poly = np.array([1.0])
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    if D:
        seasonal = np.zeros(s + 1)
        seasonal[0], seasonal[s] = 1.0, -1.0
        for _ in range(D):
            poly = np.convolve(poly, seasonal)
    return poly


def _lag_poly(coeffs: np.ndarray, s: int = 1, sign: float = -1.0) -> np.ndarray:
    """Ascending lag polynomial 1 + sign*c1*B^s + sign*c2*B^2s + ..."""
    out = np.zeros(len(coeffs) * s + 1)
    out[0] = 1.0
    for i, c in enumerate(coeffs, start=1):
        out[i * s] = sign * c
    return out


_CUBE_ROOT_UNITY = complex(-0.5, 0.5 * math.sqrt(3.0))


def _cubic_min_modulus(a: float, b: float, c: float) -> float:
    """Smallest |root| of 1 + a*B + b*B^2 + c*B^3 (c != 0), via Cardano."""
    d0 = b * b - 3.0 * c * a
    d1 = 2.0 * b ** 3 - 9.0 * c * b * a + 27.0 * c * c
    inner = complex(d1 * d1 - 4.0 * d0 ** 3) ** 0.5
    base = d1 + inner
    if abs(base) < abs(d1 - inner):
        base = d1 - inner
    C = (base / 2.0) ** (1.0 / 3.0)
    if C == 0.0:  # triple root
        return abs(b / (3.0 * c))
    best = math.inf
    zeta = 1.0 + 0.0j
    for _ in range(3):
        Ck = C * zeta
        root = -(b + Ck + d0 / Ck) / (3.0 * c)
        best = min(best, abs(root))
        zeta *= _CUBE_ROOT_UNITY
    return best


def _min_root_modulus(coeffs_asc) -> float:
    """Smallest root modulus of an ascending lag polynomial (1 + c1 B + ...)."""
    c = coeffs_asc
    k = len(c)
    while k > 1 and c[k - 1] == 0.0:
        k -= 1
    if k == 1:
        return math.inf
    if k == 2:
        return 1.0 / abs(c[1])
    if k == 3:
        a, b = c[1], c[2]
        disc = a * a - 4.0 * b
        if disc < 0.0:
            return math.sqrt(1.0 / b)  # conjugate pair: |r|^2 = 1/b, b > 0 here
        sq = math.sqrt(disc)
        r1 = (-a + sq) / (2.0 * b)
        r2 = (-a - sq) / (2.0 * b)
        return min(abs(r1), abs(r2))
    if k == 4:
        return _cubic_min_modulus(c[1], c[2], c[3])
    return float(np.min(np.abs(np.roots(np.asarray(c[:k])[::-1]))))


def _seasonal_root_modulus(coef: float, s: int) -> float:
    # 1 - coef * B^s: roots have modulus |coef|^(-1/s)
    if coef == 0.0:
        return math.inf
    return abs(coef) ** (-1.0 / s)


@dataclass(frozen=True)
class _ParamView:
    intercept: float
    phi: np.ndarray
    theta: np.ndarray
    Phi: np.ndarray
    Theta: np.ndarray
    beta: np.ndarray


def unpack_params(params, order: ArimaOrder, n_exog: int) -> _ParamView:
    params = np.asarray(params, dtype=np.float64)
    expected = 1 + order.n_coeffs() + n_exog
    if len(params) != expected:
        raise ValueError(f"expected {expected} parameters, got {len(params)}")
    pos = 1
    phi = params[pos:pos + order.p]; pos += order.p
    theta = params[pos:pos + order.q]; pos += order.q
    Phi = params[pos:pos + order.P]; pos += order.P
    Theta = params[pos:pos + order.Q]; pos += order.Q
    beta = params[pos:]
    return _ParamView(float(params[0]), phi, theta, Phi, Theta, beta)


def _full_ar_ma(view: _ParamView, order: ArimaOrder):
    ar = _lag_poly(view.phi)
    ma = _lag_poly(view.theta, sign=1.0)
    if order.s:
        if order.P:
            ar = np.convolve(ar, _lag_poly(view.Phi, s=order.s))
        if order.Q:
            ma = np.convolve(ma, _lag_poly(view.Theta, s=order.s, sign=1.0))
    return ar, ma


def css_residuals(z_centered: np.ndarray, ar_asc: np.ndarray,
                  ma_asc: np.ndarray) -> np.ndarray:
    """One-step residuals of the ARMA recursion, zero pre-sample residuals.

    Residuals start at the first index where every AR lag of the data exists,
    so only the residual history (not the data) is zero-initialized.
    """
    L = len(ar_asc) - 1
    n = len(z_centered)
    if n <= L:
        raise DataError(f"need more than {L} observations, got {n}")
    from ._kernels import css_residuals_loop
    return css_residuals_loop(np.ascontiguousarray(z_centered, dtype=np.float64),
                              np.ascontiguousarray(ar_asc, dtype=np.float64),
                              np.ascontiguousarray(ma_asc, dtype=np.float64))


def _root_penalty(view: _ParamView, order: ArimaOrder) -> float:
    total = 0.0
    for modulus in _factor_root_moduli(view, order):
        if modulus < ROOT_MARGIN:
            gap = ROOT_MARGIN - modulus
            total += gap * gap
    return total


def _factor_root_moduli(view: _ParamView, order: ArimaOrder):
    """Min root modulus of each AR/MA factor (seasonal sign is irrelevant
    to the modulus, so one helper serves both)."""
    return (
        _min_root_modulus(_lag_poly(view.phi)),
        _min_root_modulus(_lag_poly(view.theta, sign=1.0)),
        _seasonal_root_modulus(view.Phi[0] if order.P else 0.0, max(order.s, 1)),
        _seasonal_root_modulus(view.Theta[0] if order.Q else 0.0, max(order.s, 1)),
    )


def css_objective(params, differenced_values, exog_matrix,
                  order: ArimaOrder) -> float:
    """Sum of squared one-step residuals plus the unit-root barrier.

    Returns +inf for any non-finite intermediate, so the optimizer simply
    rejects the point.
    """
    n_exog = 0 if exog_matrix is None else exog_matrix.shape[1]
    view = unpack_params(params, order, n_exog)
    z = np.asarray(differenced_values, dtype=np.float64) - view.intercept
    if n_exog:
        z = z - exog_matrix @ view.beta
    ar, ma = _full_ar_ma(view, order)
    e = css_residuals(z, ar, ma)
    ssr = float(e @ e)
    if not math.isfinite(ssr):
        return math.inf
    penalty = _root_penalty(view, order)
    if penalty:
        return ssr + (1.0 + ssr) * _PENALTY_WEIGHT * penalty
    return ssr


@dataclass(frozen=True)
class FitConfig:
    step: float = 0.25
    diameter_tol: float = 1e-6
    max_iter: int = 2000


DEFAULT_FIT = FitConfig()


@dataclass(frozen=True, eq=False)
class ArimaModel:
    """A fitted (or hand-built) model plus the state needed to keep forecasting.

    tail_values are the last d + s*D raw observations, tail_z the last
    max-AR-lag centered differenced values, tail_residuals the last
    max-MA-lag one-step residuals, all in training order.
    """

    order: ArimaOrder
    intercept: float
    phi: np.ndarray
    theta: np.ndarray
    Phi: np.ndarray
    Theta: np.ndarray
    beta: np.ndarray
    sigma2: float
    exog_spec: ExogSpec = NO_EXOG
    tail_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    tail_z: np.ndarray = field(default_factory=lambda: np.empty(0))
    tail_residuals: np.ndarray = field(default_factory=lambda: np.empty(0))
    n_eff: int = 0
    aic: float = math.nan
    converged: bool = True

    def __post_init__(self):
        for name in ("phi", "theta", "Phi", "Theta", "beta", "tail_values",
                     "tail_z", "tail_residuals"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=np.float64))
        if self.sigma2 <= 0.0:
            raise FitError(f"sigma2 must be positive, got {self.sigma2}")
        view = self._view()
        for modulus in _factor_root_moduli(view, self.order):
            if modulus <= 1.0:
                raise FitError(
                    f"model {self.order} has a characteristic root of modulus "
                    f"{modulus:.6f} inside or on the unit circle"
                )

    def _view(self) -> _ParamView:
        return _ParamView(self.intercept, self.phi, self.theta, self.Phi,
                          self.Theta, self.beta)

    @property
    def n_params(self) -> int:
        return 1 + self.order.n_coeffs() + self.exog_spec.n_columns


def n_effective(n_differenced: int, order: ArimaOrder) -> int:
    return n_differenced - order.max_ar_lag


def fit(
    values,
    order: ArimaOrder,
    exog_spec: ExogSpec = NO_EXOG,
    dates=None,
    cfg: FitConfig = DEFAULT_FIT,
) -> ArimaModel:
    """Estimate a model by CSS + Nelder-Mead from the deterministic start.

    Data are standardized internally (coefficients are reported on the
    original scale) so the optimizer tolerances behave identically for raw
    counts and normalized units.
    """
    values = np.asarray(values, dtype=np.float64)
    w = difference(values, order.d, order.D, order.s)
    n_eff = n_effective(len(w), order)
    if n_eff < 10:
        raise FitError(f"only {n_eff} effective observations for order {order}")
    wdates = None if dates is None else tuple(dates)[order.diff_span:]
    exog = make_exog(exog_spec, wdates)

    scale = float(np.std(w))
    if scale == 0.0 or not math.isfinite(scale):
        scale = 1.0
    ws = w / scale

    n_exog = 0 if exog is None else exog.shape[1]
    x0 = np.full(1 + order.n_coeffs() + n_exog, 0.1)
    x0[0] = float(np.mean(ws))

    try:
        result = nelder_mead(
            lambda p: css_objective(p, ws, exog, order),
            x0, step=cfg.step, diameter_tol=cfg.diameter_tol,
            max_iter=cfg.max_iter,
        )
    except OptimizerError as exc:
        raise FitError(f"optimizer failed for order {order}: {exc}") from exc

    view = unpack_params(result.x, order, n_exog)
    sigma2 = max(result.fx / n_eff, 1e-300) * scale * scale
    k = 1 + order.n_coeffs() + n_exog
    aic = n_eff * math.log(sigma2) + 2.0 * k

    # residuals and state tails on the original scale
    z = w - view.intercept * scale
    if n_exog:
        z = z - exog @ (view.beta * scale)
    ar, ma = _full_ar_ma(view, order)
    resid = css_residuals(z, ar, ma)
    L_ar, L_ma = order.max_ar_lag, order.max_ma_lag

    model = ArimaModel(
        order=order,
        intercept=view.intercept * scale,
        phi=view.phi.copy(),
        theta=view.theta.copy(),
        Phi=view.Phi.copy(),
        Theta=view.Theta.copy(),
        beta=view.beta * scale,
        sigma2=sigma2,
        exog_spec=exog_spec,
        tail_values=values[len(values) - order.diff_span:] if order.diff_span else np.empty(0),
        tail_z=z[len(z) - L_ar:] if L_ar else np.empty(0),
        tail_residuals=resid[len(resid) - L_ma:] if L_ma else np.empty(0),
        n_eff=n_eff,
        aic=aic,
        converged=result.converged,
    )
    return model


def rolling_forecast(model: ArimaModel, test_values, test_dates=None) -> np.ndarray:
    """One-step-ahead predictions over the test segment.

    Each prediction conditions on every true observation before it; the state
    is advanced with the realized value after each step, coefficients are
    never refit. Differencing is undone exactly.
    """
    test_values = np.asarray(test_values, dtype=np.float64)
    order = model.order
    exog = make_exog(model.exog_spec, test_dates)
    if exog is not None and exog.shape[0] != len(test_values):
        raise DataError("exog rows do not match the test length")

    dc = diff_polynomial(order.d, order.D, order.s)
    d_total = order.diff_span
    L_ar, L_ma = order.max_ar_lag, order.max_ma_lag
    if len(model.tail_values) < d_total:
        raise DataError(f"model tail has {len(model.tail_values)} raw values, "
                        f"needs {d_total}")
    if len(model.tail_z) < L_ar or len(model.tail_residuals) < L_ma:
        raise DataError("model tail state too short for its order")

    view = model._view()
    ar, ma = _full_ar_ma(view, order)

    raw = deque(model.tail_values[-d_total:] if d_total else [], maxlen=max(d_total, 1))
    z_hist = deque(model.tail_z[-L_ar:] if L_ar else [], maxlen=max(L_ar, 1))
    e_hist = deque(model.tail_residuals[-L_ma:] if L_ma else [], maxlen=max(L_ma, 1))

    preds = np.empty(len(test_values))
    for i, x_true in enumerate(test_values):
        offset = model.intercept
        if exog is not None:
            offset += float(exog[i] @ model.beta)
        zhat = 0.0
        for k in range(1, L_ar + 1):
            zhat -= ar[k] * z_hist[-k]
        for j in range(1, L_ma + 1):
            zhat += ma[j] * e_hist[-j]
        what = offset + zhat
        xhat = what
        for k in range(1, d_total + 1):
            xhat -= dc[k] * raw[-k]
        preds[i] = xhat

        w_t = float(x_true)
        for k in range(1, d_total + 1):
            w_t += dc[k] * raw[-k]
        z_t = w_t - offset
        if L_ar:
            z_hist.append(z_t)
        if L_ma:
            e_hist.append(z_t - zhat)
        if d_total:
            raw.append(float(x_true))
    return preds


def arima_grid() -> list[ArimaOrder]:
    return [
        ArimaOrder(p, d, q)
        for p in range(4) for d in range(2) for q in range(4)
    ]


def seasonal_grid(s: int = 52) -> list[ArimaOrder]:
    out = []
    for p in range(4):
        for d in range(2):
            for q in range(4):
                for P in range(2):
                    for D in range(2):
                        for Q in range(2):
                            if P == 0 and D == 0 and Q == 0:
                                continue
                            out.append(ArimaOrder(p, d, q, P, D, Q, s))
    return out


def grid_search(
    values,
    grid,
    exog_spec: ExogSpec = NO_EXOG,
    dates=None,
    cfg: FitConfig = DEFAULT_FIT,
) -> tuple[ArimaOrder, ArimaModel]:
    """Fit every order in the grid, return the AIC winner and its model.

    Ties break toward fewer parameters, then the lexicographically smaller
    order tuple. Orders whose fit fails are skipped.
    """
    if not grid:
        raise ValueError("empty order grid")
    best = None
    failures = []
    for order in grid:
        try:
            model = fit(values, order, exog_spec=exog_spec, dates=dates, cfg=cfg)
        except (FitError, DataError) as exc:
            failures.append(f"{order}: {exc}")
            continue
        key = (model.aic, model.n_params, order.tuple)
        if best is None or key < best[0]:
            best = (key, order, model)
    if best is None:
        raise FitError(
            "every order in the grid failed to fit; first failure: "
            + (failures[0] if failures else "(none recorded)")
        )
    return best[1], best[2]


def select_order(
    values, grid, exog_spec: ExogSpec = NO_EXOG, dates=None,
    cfg: FitConfig = DEFAULT_FIT,
) -> ArimaOrder:
    """AIC-minimizing order over the grid (see grid_search for tie rules)."""
    order, _ = grid_search(values, grid, exog_spec=exog_spec, dates=dates, cfg=cfg)
    return order


MODEL_FORMAT_VERSION = 1


def model_to_record(model: ArimaModel) -> dict:
    """Flat JSON-ready record of a fitted model."""
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "arima-family",
        "order": list(model.order.tuple),
        "intercept": model.intercept,
        "phi": model.phi.tolist(),
        "theta": model.theta.tolist(),
        "seasonal_phi": model.Phi.tolist(),
        "seasonal_theta": model.Theta.tolist(),
        "beta": model.beta.tolist(),
        "sigma2": model.sigma2,
        "exog": {"kind": model.exog_spec.kind, "K": model.exog_spec.K},
        "tail_values": model.tail_values.tolist(),
        "tail_z": model.tail_z.tolist(),
        "tail_residuals": model.tail_residuals.tolist(),
        "n_eff": model.n_eff,
        "aic": model.aic,
        "converged": model.converged,
    }


def model_from_record(record: dict) -> ArimaModel:
    if record.get("format_version") != MODEL_FORMAT_VERSION:
        raise DataError(f"unsupported model format {record.get('format_version')!r}")
    p, d, q, P, D, Q, s = record["order"]
    return ArimaModel(
        order=ArimaOrder(p, d, q, P, D, Q, s),
        intercept=float(record["intercept"]),
        phi=np.array(record["phi"]),
        theta=np.array(record["theta"]),
        Phi=np.array(record["seasonal_phi"]),
        Theta=np.array(record["seasonal_theta"]),
        beta=np.array(record["beta"]),
        sigma2=float(record["sigma2"]),
        exog_spec=ExogSpec(record["exog"]["kind"], record["exog"]["K"]),
        tail_values=np.array(record["tail_values"]),
        tail_z=np.array(record["tail_z"]),
        tail_residuals=np.array(record["tail_residuals"]),
        n_eff=int(record["n_eff"]),
        aic=float(record["aic"]),
        converged=bool(record["converged"]),
    )
