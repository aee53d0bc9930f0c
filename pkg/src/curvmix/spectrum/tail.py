"""Power-law tail fitting and extrapolation of partially measured spectra."""

from __future__ import annotations

import numpy as np

from curvmix.errors import ArgumentError, TailFitError
from curvmix.utils.logging import get_logger

from .types import EigenSpectrum, TailFit

logger = get_logger(__name__)


def fit_tail(topk: EigenSpectrum, p_plus: int, mu_pplus: float) -> TailFit:
    """Fit the anchored tail model to the measured leading eigenvalues.

    The model is ``log mu_i = C (log p+ - log i)^alpha + log mu_p+`` for 1-based
    ``i``, which passes through ``(p+, mu_p+)``. Taking logs twice makes it linear,
    ``log(log mu_i - log mu_p+) = log C + alpha log(log p+ - log i)``, and the two
    coefficients come from an ordinary least-squares line through those points.

    Args:
        topk: Spectrum whose measured prefix is fitted.
        p_plus: Index where the tail ends; must exceed ``topk.k_measured``.
        mu_pplus: Eigenvalue magnitude at ``p_plus``.

    Returns:
        Fitted tail. All-equal measured values give the flat tail ``C = 0, alpha = 1``.
    """
    k = topk.k_measured
    if mu_pplus <= 0:
        message = f"mu_pplus must be positive, got {mu_pplus}"
        raise ArgumentError(message)
    if p_plus <= k:
        message = f"p_plus={p_plus} must exceed the measured count {k}"
        raise ArgumentError(message)

    measured = topk.measured
    if k == 0 or np.ptp(measured) == 0.0:
        return TailFit(coeff_C=0.0, alpha=1.0, p_plus=p_plus, mu_pplus=mu_pplus, k_used=0)

    index = np.arange(1, k + 1, dtype=np.float64)
    usable = measured > mu_pplus
    if not np.all(usable):
        logger.info("tail-fit-dropped-points", dropped=int(np.count_nonzero(~usable)))
    if np.count_nonzero(usable) < 2:
        message = (
            f"only {np.count_nonzero(usable)} measured values exceed mu_pplus={mu_pplus}"
        )
        raise TailFitError(message)

    x = np.log(np.log(p_plus) - np.log(index[usable]))
    y = np.log(np.log(measured[usable]) - np.log(mu_pplus))
    if np.ptp(x) == 0.0:
        message = "tail fit needs at least two distinct indices"
        raise TailFitError(message)
    design = np.column_stack([x, np.ones_like(x)])
    (alpha, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    if not alpha > 0:
        message = f"fitted alpha={alpha:.6g} is not positive; the values do not decay"
        raise TailFitError(message)
    fit = TailFit(
        coeff_C=float(np.exp(intercept)),
        alpha=float(alpha),
        p_plus=p_plus,
        mu_pplus=mu_pplus,
        k_used=int(np.count_nonzero(usable)),
    )
    logger.info(
        "tail-fitted",
        coeff_C=fit.coeff_C,
        alpha=fit.alpha,
        k_used=fit.k_used,
        p_plus=p_plus,
    )
    return fit


def extrapolate(fit: TailFit, topk: EigenSpectrum, p: int) -> EigenSpectrum:
    """Complete a measured prefix into a full length-``p`` spectrum.

    Indices ``1..k`` keep the measured values, ``k+1..p+`` follow the fitted curve
    (clamped to at most the last measured value), and the rest are zero.

    Args:
        fit: Tail model.
        topk: Spectrum providing the measured prefix.
        p: Output length, at least ``fit.p_plus``.

    Returns:
        Full spectrum of length ``p`` with ``k_measured`` carried over.
    """
    if p < fit.p_plus:
        message = f"p={p} must be at least p_plus={fit.p_plus}"
        raise ArgumentError(message)
    k = topk.k_measured
    if k > fit.p_plus:
        message = f"measured count {k} exceeds p_plus={fit.p_plus}"
        raise ArgumentError(message)

    values = np.zeros(p)
    values[:k] = topk.measured
    curve = fit.evaluate(np.arange(k + 1, fit.p_plus + 1, dtype=np.float64))
    if k > 0:
        curve = np.minimum(curve, values[k - 1])
    values[k : fit.p_plus] = curve
    return EigenSpectrum(
        values=values,
        total_dim=p,
        k_measured=k,
        source=f"extrapolated(k={k},p_plus={fit.p_plus}):{topk.source}",
    )
