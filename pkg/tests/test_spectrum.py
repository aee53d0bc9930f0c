"""Tests for eigenspectrum estimation, truncation and tail fitting."""

from __future__ import annotations

import numpy as np
import pytest
from structlog.testing import capture_logs

from curvmix.errors import ArgumentError, SpectrumSizeError, TailFitError
from curvmix.spectrum import (
    EigenSpectrum,
    SymmetricOperator,
    TailFit,
    check_symmetry,
    dense_eigs,
    extrapolate,
    fit_tail,
    lanczos_topk,
    merge_spectra,
    top_k,
    truncate_negative,
)


def power_law(coeff: float, alpha: float, p_plus: int, mu: float, count: int) -> np.ndarray:
    """Forward-generate the anchored tail model at ``i = 1..count``."""
    i = np.arange(1, count + 1, dtype=np.float64)
    return np.exp(coeff * (np.log(p_plus) - np.log(i)) ** alpha + np.log(mu))


def random_symmetric(p: int, seed: int) -> np.ndarray:
    """Dense random symmetric matrix."""
    a = np.random.default_rng(seed).standard_normal((p, p))
    return 0.5 * (a + a.T)


def test_lanczos_diagonal_operator() -> None:
    """Diagonal entries are the eigenvalues."""
    op = SymmetricOperator.diagonal([5.0, 4.0, 3.0, 2.0, 1.0])
    result = lanczos_topk(op, 3)
    np.testing.assert_allclose(result.values, [5.0, 4.0, 3.0], atol=1e-8)
    assert result.converged
    assert result.k_measured == 3
    assert result.total_dim == 5


def test_lanczos_identity_recovers_repeated_eigenvalue() -> None:
    """Breakdown on the identity restarts until four copies of 1 are found."""
    op = SymmetricOperator.from_matrix(np.eye(10))
    result = lanczos_topk(op, 4)
    np.testing.assert_allclose(result.values, [1.0, 1.0, 1.0, 1.0], atol=1e-12)
    assert result.converged


@pytest.mark.parametrize("k", (1, 5, 10, 20))
def test_lanczos_matches_dense(k: int) -> None:
    """Leading Ritz values agree with a direct eigensolve of the same matrix.

    Args:
        k: Number of eigenvalues requested.
    """
    matrix = random_symmetric(200, seed=3)
    expected = np.sort(np.linalg.eigvalsh(matrix))[::-1][:k]
    result = lanczos_topk(SymmetricOperator.from_matrix(matrix), k, seed=11)
    np.testing.assert_allclose(result.values, expected, rtol=1e-6)


def test_lanczos_is_deterministic() -> None:
    """The same seed gives bit-identical values."""
    op = SymmetricOperator.from_matrix(random_symmetric(60, seed=1))
    first = lanczos_topk(op, 5, max_iters=20, seed=4)
    second = lanczos_topk(op, 5, max_iters=20, seed=4)
    np.testing.assert_array_equal(first.values, second.values)


def test_lanczos_reports_non_convergence() -> None:
    """A tiny Krylov budget flags the result and logs a warning."""
    op = SymmetricOperator.from_matrix(random_symmetric(300, seed=5))
    with capture_logs() as logs:
        result = lanczos_topk(op, 5, max_iters=6, seed=0)
    assert not result.converged
    assert result.values.size == 5
    assert any(entry["event"] == "lanczos-not-converged" for entry in logs)


@pytest.mark.parametrize(
    ("k", "max_iters"),
    (
        (0, None),  # k below 1
        (11, None),  # k above dim
        (5, 3),  # budget below k
    ),
)
def test_lanczos_rejects_bad_arguments(k: int, max_iters: int | None) -> None:
    """Precondition violations raise an argument error.

    Args:
        k: Requested eigenvalue count.
        max_iters: Krylov budget.
    """
    op = SymmetricOperator.diagonal(np.arange(10.0))
    with pytest.raises(ArgumentError):
        lanczos_topk(op, k, max_iters=max_iters)


@pytest.mark.parametrize(
    ("matrix", "expected"),
    (
        ([[2.0, 0.0], [0.0, 3.0]], [3.0, 2.0]),
        ([[0.0, 1.0], [1.0, 0.0]], [1.0, -1.0]),
    ),
)
def test_dense_eigs_small(matrix: list[list[float]], expected: list[float]) -> None:
    """Known 2x2 spectra come back sorted non-increasing.

    Args:
        matrix: Symmetric input.
        expected: Its eigenvalues, largest first.
    """
    result = dense_eigs(matrix)
    np.testing.assert_allclose(result.values, expected, atol=1e-14)
    assert result.k_measured == result.total_dim == 2


def test_dense_eigs_agrees_with_full_lanczos() -> None:
    """With ``k = p`` the two eigensolvers return the same spectrum."""
    matrix = random_symmetric(50, seed=8)
    dense = dense_eigs(matrix)
    lanczos = lanczos_topk(SymmetricOperator.from_matrix(matrix), 50)
    np.testing.assert_allclose(lanczos.values, dense.values, atol=1e-8)


def test_dense_eigs_size_cap() -> None:
    """Matrices above the cap raise a size error."""
    with pytest.raises(SpectrumSizeError):
        dense_eigs(np.eye(5), cap=4)


def test_dense_eigs_rejects_asymmetric() -> None:
    """A non-symmetric input is an argument error."""
    with pytest.raises(ArgumentError):
        dense_eigs([[1.0, 2.0], [0.0, 1.0]])


def test_check_symmetry_detects_defect() -> None:
    """Symmetric operators pass and a skewed one is flagged."""
    sym = SymmetricOperator.from_matrix(random_symmetric(20, seed=2))
    skew = np.triu(np.ones((20, 20)))
    asym = SymmetricOperator(dim=20, apply=lambda v: skew @ v)
    assert check_symmetry(sym) <= 1e-10
    assert check_symmetry(asym) > 1e-3


@pytest.mark.parametrize(
    ("values", "expected"),
    (
        ([3.0, 1.0, -0.2, -5.0], [3.0, 1.0, 0.0, 0.0]),
        ([0.0, 0.0], [0.0, 0.0]),
        ([-1.0], [0.0]),
    ),
)
def test_truncate_negative(values: list[float], expected: list[float]) -> None:
    """Negative values become zero and truncation is idempotent.

    Args:
        values: Sorted input spectrum.
        expected: Truncated spectrum.
    """
    spectrum = EigenSpectrum(values=np.array(values), total_dim=len(values), k_measured=len(values))
    once = truncate_negative(spectrum)
    np.testing.assert_array_equal(once.values, expected)
    np.testing.assert_array_equal(truncate_negative(once).values, once.values)
    assert once.total_dim == spectrum.total_dim


def test_spectrum_validation() -> None:
    """Unsorted values and oversize spectra are rejected."""
    with pytest.raises(ArgumentError):
        EigenSpectrum(values=np.array([1.0, 2.0]), total_dim=2, k_measured=2)
    with pytest.raises(ArgumentError):
        EigenSpectrum(values=np.array([2.0, 1.0]), total_dim=1, k_measured=2)


def test_top_k_and_merge() -> None:
    """Top-k keeps the leading prefix and merging re-sorts the union."""
    a = EigenSpectrum.from_values([3.0, 1.0, 2.0])
    b = EigenSpectrum.from_values([2.5, 0.5])
    head = top_k(a, 2)
    np.testing.assert_array_equal(head.values, [3.0, 2.0])
    assert head.total_dim == 3
    merged = merge_spectra(a, b)
    np.testing.assert_array_equal(merged.values, [3.0, 2.5, 2.0, 1.0, 0.5])
    assert merged.total_dim == 5


def test_fit_tail_recovers_model() -> None:
    """Noiseless data from the model gives back its coefficients."""
    values = power_law(2.0, 1.5, 10_000, 1e-6, 500)
    topk = EigenSpectrum(values=values, total_dim=20_000, k_measured=500)
    fit = fit_tail(topk, 10_000, 1e-6)
    assert fit.coeff_C == pytest.approx(2.0, abs=1e-6)
    assert fit.alpha == pytest.approx(1.5, abs=1e-6)
    assert fit.k_used == 500


@pytest.mark.parametrize("k", (20, 200, 1000))
def test_fit_tail_anchor_configuration(k: int) -> None:
    """The fitted curve is non-increasing on the whole range and hits the anchor.

    Args:
        k: Number of measured eigenvalues.
    """
    values = power_law(0.8, 1.2, 12_000, 1e-6, k) * (1.0 + 0.01 * np.cos(np.arange(k)))
    values = np.sort(values)[::-1]
    topk = EigenSpectrum(values=values, total_dim=12_000, k_measured=k)
    fit = fit_tail(topk, 12_000, 1e-6)
    curve = fit.evaluate(np.arange(1, 12_001))
    assert np.all(np.diff(curve) <= 0)
    assert curve[-1] == pytest.approx(1e-6, rel=1e-12)


def test_fit_tail_flat_fallback() -> None:
    """All-equal measured values give the flat tail."""
    topk = EigenSpectrum(values=np.full(3, 1e-6), total_dim=100, k_measured=3)
    fit = fit_tail(topk, 50, 1e-6)
    assert (fit.coeff_C, fit.alpha) == (0.0, 1.0)


def test_fit_tail_needs_two_points() -> None:
    """One usable point is not enough for a line."""
    topk = EigenSpectrum(values=np.array([1.0, 1e-7]), total_dim=100, k_measured=2)
    with pytest.raises(TailFitError):
        fit_tail(topk, 50, 1e-6)


def test_extrapolate_matches_forward_model() -> None:
    """Extending a model-generated prefix reproduces the model pointwise."""
    truth = power_law(2.0, 1.5, 10_000, 1e-6, 10_000)
    topk = EigenSpectrum(values=truth[:500], total_dim=12_000, k_measured=500)
    fit = fit_tail(topk, 10_000, 1e-6)
    full = extrapolate(fit, topk, 12_000)
    np.testing.assert_allclose(full.values[:10_000], truth, rtol=1e-9)
    assert np.all(full.values[10_000:] == 0.0)
    assert np.all(np.diff(full.values) <= 0)
    assert full.k_measured == 500


def test_extrapolate_flat_and_boundary() -> None:
    """A flat fit over nothing measured repeats the anchor, with no padding at p = p+."""
    empty = EigenSpectrum(values=np.zeros(0), total_dim=10, k_measured=0)
    flat = TailFit(coeff_C=0.0, alpha=1.0, p_plus=6, mu_pplus=1e-3, k_used=0)
    padded = extrapolate(flat, empty, 10)
    np.testing.assert_allclose(padded.values, [1e-3] * 6 + [0.0] * 4)
    exact = extrapolate(flat, empty, 6)
    assert exact.values.size == 6
    assert np.all(exact.values > 0)


def test_extrapolate_rejects_short_output() -> None:
    """The output must reach the anchor index."""
    flat = TailFit(coeff_C=0.0, alpha=1.0, p_plus=6, mu_pplus=1e-3, k_used=0)
    empty = EigenSpectrum(values=np.zeros(0), total_dim=10, k_measured=0)
    with pytest.raises(ArgumentError):
        extrapolate(flat, empty, 5)


def test_spectrum_documents_round_trip() -> None:
    """Spectra and fits survive their JSON document form."""
    spectrum = EigenSpectrum(values=np.array([2.0, 1.0]), total_dim=4, k_measured=1, source="x")
    parsed = EigenSpectrum.from_dict(spectrum.to_dict())
    np.testing.assert_array_equal(parsed.values, spectrum.values)
    assert (parsed.total_dim, parsed.k_measured, parsed.source) == (4, 1, "x")
    fit = TailFit(coeff_C=1.5, alpha=2.0, p_plus=10, mu_pplus=0.1, k_used=3)
    assert TailFit.from_dict(fit.to_dict()) == fit
