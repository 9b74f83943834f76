"""tests for correlation spectra, the marchenko-pastur law and spacing statistics."""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt
import pytest
from scipy import integrate, optimize, stats

from scalescope.errors import (
    ConstraintError,
    DegenerateScripError,
    EigenSolverError,
    GoeFitError,
    UnfoldingError,
)
from scalescope.rmt import (
    MAX_HISTOGRAM_BINS,
    RmtSettings,
    analyse_scale,
    correlation_matrix,
    eigenvalue_density,
    eigenvalues_sym,
    fit_spacing_density,
    histogram_edges,
    jacobi_eigenvalues,
    mp_bounds,
    mp_chi_square,
    mp_density,
    mp_mass,
    nn_spacings,
    scale_sweep,
    unfold_eigenvalues,
    wigner_cdf,
    wigner_pdf,
)
from scalescope.synth import goe_matrix, white_noise, wishart_panel
from scalescope.wbfe import FluctuationPanel


def _panel(matrix: npt.ArrayLike, scale: int = 1) -> FluctuationPanel:
    x = np.asarray(matrix, dtype=np.float64)
    return FluctuationPanel(
        scale=scale, matrix=x, tickers=tuple(f"S{i:03d}" for i in range(x.shape[0]))
    )


def _charpoly_eigenvalues(a: np.ndarray) -> np.ndarray:
    """Eigenvalues as roots of the faddeev-leverrier characteristic polynomial."""
    n = a.shape[0]
    identity = np.eye(n)
    coeffs = [1.0]
    m = np.zeros_like(a)
    c = 1.0
    for k in range(1, n + 1):
        m = a @ m + c * identity
        c = -float(np.trace(a @ m)) / k
        coeffs.append(c)
    roots = np.sort(np.roots(coeffs).real)
    # newton on det(x - a), accepted only for small corrections
    for i, x in enumerate(roots):
        for _ in range(3):
            try:
                trace = float(np.trace(np.linalg.inv(a - x * identity)))
            except np.linalg.LinAlgError:
                break
            if trace == 0.0 or not math.isfinite(trace) or abs(1.0 / trace) > 1e-6:
                break
            x += 1.0 / trace
        roots[i] = x
    return np.sort(roots)


def _surmise_samples(count: int, seed: int) -> np.ndarray:
    u = np.random.Generator(np.random.PCG64(seed)).random(count)
    return np.sqrt(-4.0 * np.log1p(-u) / math.pi)


class TestCorrelationMatrix:
    """Test correlation_matrix."""

    def test_identical_rows(self) -> None:
        """Test that identical rows correlate perfectly."""
        row = white_noise(200, seed=1)
        corr = correlation_matrix(np.vstack([row, row, row]))
        np.testing.assert_allclose(corr.matrix, 1.0, atol=1e-12)

    def test_negated_row(self) -> None:
        """Test that a negated row correlates at -1."""
        row = white_noise(200, seed=2)
        corr = correlation_matrix(np.vstack([row, -row]))
        assert corr.matrix[0, 1] == pytest.approx(-1.0, abs=1e-12)

    def test_symmetric_unit_diagonal(self) -> None:
        """Test symmetry, unit diagonal and positive semi-definiteness."""
        corr = correlation_matrix(_panel(wishart_panel(30, 400, seed=3)))
        np.testing.assert_array_equal(corr.matrix, corr.matrix.T)
        np.testing.assert_allclose(np.diag(corr.matrix), 1.0, atol=1e-9)
        assert float(np.linalg.eigvalsh(corr.matrix).min()) >= -1e-9
        assert corr.ratio == pytest.approx(400 / 30)

    def test_independent_rows(self) -> None:
        """Test that independent noise rows have small correlations."""
        length = 4000
        for seed in range(20):
            corr = correlation_matrix(wishart_panel(5, length, seed=seed))
            off = corr.matrix[~np.eye(5, dtype=bool)]
            assert float(np.abs(off).max()) <= 5.0 / math.sqrt(length)

    def test_zero_variance_row(self) -> None:
        """Test that a flat row is refused with its ticker."""
        x = wishart_panel(3, 100, seed=4)
        x[1] = 0.5
        with pytest.raises(DegenerateScripError) as info:
            _ = correlation_matrix(_panel(x))
        assert info.value.ticker == "S001"

    def test_too_few_columns(self) -> None:
        """Test that t <= n is refused."""
        with pytest.raises(ConstraintError):
            _ = correlation_matrix(white_noise(20, seed=1).reshape(5, 4))


class TestEigenvalues:
    """Test the symmetric eigensolvers."""

    def test_identity(self) -> None:
        """Test that the identity has unit eigenvalues."""
        np.testing.assert_allclose(eigenvalues_sym(np.eye(6)), 1.0, atol=1e-12)

    @pytest.mark.parametrize("rho", [0.0, 0.3, -0.8, 0.999])
    def test_two_by_two(self, rho: float) -> None:
        """Test that [[1, rho], [rho, 1]] has eigenvalues 1 -+ |rho|."""
        eigs = eigenvalues_sym(np.array([[1.0, rho], [rho, 1.0]]))
        np.testing.assert_allclose(eigs, [1.0 - abs(rho), 1.0 + abs(rho)], atol=1e-12)

    def test_characteristic_polynomial_oracle(self) -> None:
        """Test jacobi against characteristic-polynomial roots on small matrices."""
        rng = np.random.Generator(np.random.PCG64(2024))
        for instance in range(1000):
            n = 2 + instance % 7
            m = rng.standard_normal((n, n))
            a = 0.5 * (m + m.T)
            expected = _charpoly_eigenvalues(a)
            got = jacobi_eigenvalues(a)
            tolerance = 1e-8 * max(1.0, float(np.abs(expected).max()))
            np.testing.assert_allclose(got, expected, rtol=0.0, atol=tolerance)

    def test_converges_across_seeds(self) -> None:
        """Test that jacobi converges on many random matrices of varied size."""
        for seed in range(300):
            n = 3 + seed % 25
            a = goe_matrix(n, seed=seed) if seed % 2 else correlation_matrix(
                wishart_panel(n, 4 * n, seed=seed)
            ).matrix
            got = jacobi_eigenvalues(a)
            expected = np.linalg.eigvalsh(a)
            tolerance = 1e-9 * max(1.0, float(np.abs(expected).max()))
            np.testing.assert_allclose(got, expected, rtol=0.0, atol=tolerance)

    @pytest.mark.filterwarnings("error::RuntimeWarning")
    def test_tiny_off_diagonal(self) -> None:
        """Test that negligible off-diagonal entries are zeroed without overflow."""
        a = np.diag([1.0, 2.0, 3.0, 4.0])
        a[0, 1] = a[1, 0] = 0.5
        a[0, 3] = a[3, 0] = 1e-300
        a[1, 2] = a[2, 1] = 1e-200
        np.testing.assert_allclose(jacobi_eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-14)

    def test_matches_lapack(self) -> None:
        """Test that both solvers agree on a goe sample."""
        a = goe_matrix(60, seed=5)
        np.testing.assert_allclose(
            eigenvalues_sym(a, "jacobi"), eigenvalues_sym(a, "lapack"), atol=1e-9
        )

    def test_trace_preserved(self) -> None:
        """Test that eigenvalues sum to the trace on a 196 x 196 matrix."""
        corr = correlation_matrix(wishart_panel(196, 1000, seed=6))
        eigs = eigenvalues_sym(corr)
        assert float(eigs.sum()) == pytest.approx(196.0, abs=1e-6 * 196)
        assert np.all(np.diff(eigs) >= 0.0)

    def test_perfectly_correlated(self) -> None:
        """Test that a rank-one panel has one eigenvalue n and the rest zero."""
        row = white_noise(300, seed=7)
        eigs = eigenvalues_sym(correlation_matrix(np.tile(row, (10, 1))))
        assert eigs[-1] == pytest.approx(10.0, abs=1e-9)
        np.testing.assert_allclose(eigs[:-1], 0.0, atol=1e-9)

    def test_sweep_budget(self) -> None:
        """Test that an exhausted sweep budget raises."""
        with pytest.raises(EigenSolverError):
            _ = jacobi_eigenvalues(goe_matrix(30, seed=8), max_sweeps=1)

    def test_rejects_non_symmetric(self) -> None:
        """Test that non-symmetric and unknown-method inputs are refused."""
        with pytest.raises(ConstraintError):
            _ = eigenvalues_sym(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(ConstraintError):
            _ = eigenvalues_sym(np.eye(3), "qr")  # type: ignore[arg-type]


class TestMarchenkoPastur:
    """Test the marchenko-pastur helpers."""

    def test_square_panel_bounds(self) -> None:
        """Test that q = 1 gives the support [0, 4]."""
        params = mp_bounds(1.0)
        assert params.lambda_min == pytest.approx(0.0, abs=1e-15)
        assert params.lambda_max == pytest.approx(4.0)

    def test_reference_bounds(self) -> None:
        """Test the support for q = 29.58."""
        params = mp_bounds(29.58)
        assert params.lambda_min == pytest.approx(0.6661, abs=1e-4)
        assert params.lambda_max == pytest.approx(1.4015, abs=1e-4)

    def test_large_ratio_collapses(self) -> None:
        """Test that the support shrinks to 1 as q grows."""
        params = mp_bounds(1e12)
        assert params.lambda_min == pytest.approx(1.0, abs=1e-5)
        assert params.lambda_max == pytest.approx(1.0, abs=1e-5)

    def test_invalid_parameters(self) -> None:
        """Test that q < 1 and sigma2 <= 0 are refused."""
        with pytest.raises(ConstraintError):
            _ = mp_bounds(0.5)
        with pytest.raises(ConstraintError):
            _ = mp_bounds(2.0, sigma2=0.0)

    def test_density_outside_support(self) -> None:
        """Test zero density outside and on the edges of the support."""
        params = mp_bounds(4.0)
        assert mp_density(params.lambda_min, params) == 0.0
        assert mp_density(params.lambda_max, params) == 0.0
        assert mp_density(10.0, params) == 0.0
        assert isinstance(mp_density(1.0, params), float)
        assert np.all(mp_density(np.linspace(0.3, 2.0, 9), params) >= 0.0)

    @pytest.mark.parametrize("q", [1.0, 2.0, 5.0, 29.58])
    def test_density_normalised(self, q: float) -> None:
        """Test that the density integrates to one."""
        params = mp_bounds(q)
        width = params.lambda_max - params.lambda_min

        def integrand(theta: float) -> float:
            lam = params.lambda_min + width * math.sin(theta) ** 2
            jacobian = 2.0 * width * math.sin(theta) * math.cos(theta)
            density = mp_density(lam, params)
            assert isinstance(density, float)
            return density * jacobian

        total, _ = integrate.quad(integrand, 0.0, math.pi / 2, limit=200)
        assert total == pytest.approx(1.0, abs=1e-6)
        assert mp_mass(-math.inf, math.inf, params) == pytest.approx(1.0, abs=1e-6)

    def test_mass_is_additive(self) -> None:
        """Test that the mass over two halves adds up."""
        params = mp_bounds(3.0)
        mid = 1.1
        whole = mp_mass(params.lambda_min, params.lambda_max, params)
        assert mp_mass(0.0, mid, params) + mp_mass(mid, 10.0, params) == pytest.approx(whole)

    def test_eigenvalue_density(self) -> None:
        """Test the empirical and expected density tables."""
        corr = correlation_matrix(wishart_panel(100, 1000, seed=9))
        eigs = eigenvalues_sym(corr, "lapack")
        table = eigenvalue_density(eigs, mp_bounds(corr.ratio))
        widths = np.diff(table.edges)
        assert int(table.counts.sum()) == 100
        assert float(np.sum(table.empirical * widths)) == pytest.approx(1.0)
        assert float(np.sum(table.expected * widths)) <= 1.0 + 1e-6

    @pytest.mark.slow
    def test_wishart_panel_follows_law(self) -> None:
        """Test eigenvalues of 196 x 5799 noise panels against the law."""
        inside = []
        for seed in range(10):
            result = analyse_scale(_panel(wishart_panel(196, 5799, seed)))
            assert result.mp is not None
            assert result.mp.q == pytest.approx(29.58, abs=0.01)
            inside.append(result.inside_fraction)
            if seed == 0:
                assert result.chi_square is not None
                assert result.chi_square.pvalue >= 0.01
        assert float(np.mean(inside)) >= 0.99


class TestUnfolding:
    """Test unfold_eigenvalues and nn_spacings."""

    def test_equal_gaps(self) -> None:
        """Test that evenly spaced eigenvalues unfold to unit spacings."""
        unfolded = unfold_eigenvalues(np.linspace(0.0, 10.0, 100))
        np.testing.assert_allclose(unfolded.spacings, 1.0, atol=1e-6)
        assert unfolded.unfolding_degree == 5

    def test_repeated_eigenvalues(self) -> None:
        """Test that repeated eigenvalues keep zero spacings."""
        unfolded = unfold_eigenvalues(np.repeat(np.linspace(0.0, 10.0, 30), 2))
        assert int(np.sum(unfolded.spacings == 0.0)) == 30
        assert np.all(np.diff(unfolded.unfolded) >= 0.0)

    def test_goe_mean_spacing(self) -> None:
        """Test unit mean spacing on a 196 x 196 goe sample."""
        eigs = eigenvalues_sym(goe_matrix(196, seed=10))
        assert float(np.mean(unfold_eigenvalues(eigs).spacings)) == pytest.approx(1.0, abs=0.05)

    def test_too_few(self) -> None:
        """Test that fewer than 20 eigenvalues are refused."""
        with pytest.raises(UnfoldingError):
            _ = unfold_eigenvalues(np.arange(19.0))

    def test_low_degree(self) -> None:
        """Test that degree < 3 is refused."""
        with pytest.raises(UnfoldingError):
            _ = unfold_eigenvalues(np.arange(40.0), degree=2)

    def test_all_equal(self) -> None:
        """Test that a fully degenerate spectrum is refused."""
        with pytest.raises(UnfoldingError):
            _ = unfold_eigenvalues(np.full(40, 1.0))

    def test_spacings_clip(self) -> None:
        """Test that spacings are differences, never negative."""
        np.testing.assert_array_equal(nn_spacings([0.0, 1.0, 0.5, 2.0]), [1.0, 0.0, 1.5])


class TestWignerSurmise:
    """Test the surmise and the spacing-density fit."""

    def test_pdf_moments(self) -> None:
        """Test that the surmise has unit mass and unit mean."""
        mass, _ = integrate.quad(lambda s: float(wigner_pdf(s)), 0.0, math.inf)
        mean, _ = integrate.quad(lambda s: s * float(wigner_pdf(s)), 0.0, math.inf)
        assert mass == pytest.approx(1.0, abs=1e-6)
        assert mean == pytest.approx(1.0, abs=1e-6)
        assert wigner_pdf(0.0) == 0.0

    def test_mode(self) -> None:
        """Test that the surmise peaks at sqrt(2 / pi)."""
        best = optimize.minimize_scalar(
            lambda s: -float(wigner_pdf(s)),
            bounds=(0.0, 3.0),
            method="bounded",
            options={"xatol": 1e-9},
        )
        assert best.x == pytest.approx(math.sqrt(2.0 / math.pi), abs=1e-4)

    def test_negative_spacing(self) -> None:
        """Test that negative spacings are refused."""
        with pytest.raises(ConstraintError):
            _ = wigner_pdf(-0.1)

    def test_cdf(self) -> None:
        """Test the closed-form cumulative distribution."""
        assert float(wigner_cdf(-1.0)) == 0.0
        mass, _ = integrate.quad(lambda s: float(wigner_pdf(s)), 0.0, 1.3)
        assert float(wigner_cdf(1.3)) == pytest.approx(mass, abs=1e-10)

    def test_histogram_edges(self) -> None:
        """Test the bin rules and the explicit count."""
        values = white_noise(100, seed=11)
        assert histogram_edges(values, bins=10).size == 11
        assert histogram_edges(values, "sqrt").size in (11, 12)
        with pytest.raises(ConstraintError):
            _ = histogram_edges(values, "scott")  # type: ignore[arg-type]

    def test_degenerate_histogram_edges(self) -> None:
        """Test that a collapsed sample gets a bounded number of fd bins."""
        values = np.concatenate([np.full(29, 1e-15), [30.0]])
        edges = histogram_edges(values, "fd")
        assert 2 <= edges.size <= MAX_HISTOGRAM_BINS + 1
        spread = np.concatenate([np.zeros(500), np.linspace(0.0, 1e-3, 500), [1e6]])
        assert histogram_edges(spread, "fd").size == MAX_HISTOGRAM_BINS + 1

    def test_fit_on_surmise_samples(self) -> None:
        """Test that surmise samples recover a = pi / 2 and b = pi / 4."""
        fit = fit_spacing_density(_surmise_samples(100_000, seed=12))
        assert fit.a == pytest.approx(math.pi / 2, rel=0.05)
        assert fit.b == pytest.approx(math.pi / 4, rel=0.05)
        assert fit.confidence[0][0] < fit.a < fit.confidence[0][1]
        assert fit.ks_stat < 0.01
        assert fit.convention == "density"

    def test_fit_raw_counts(self) -> None:
        """Test that the counts convention scales a by n times the bin width."""
        samples = _surmise_samples(100_000, seed=13)
        width = float(np.diff(histogram_edges(samples))[0])
        fit = fit_spacing_density(samples, convention="counts")
        assert fit.a == pytest.approx(samples.size * width * math.pi / 2, rel=0.05)
        assert fit.b == pytest.approx(math.pi / 4, rel=0.05)

    def test_degenerate_spacings(self) -> None:
        """Test that equal spacings are refused."""
        with pytest.raises(GoeFitError):
            _ = fit_spacing_density(np.ones(200))

    def test_too_few_spacings(self) -> None:
        """Test that fewer than 100 spacings are refused."""
        with pytest.raises(GoeFitError):
            _ = fit_spacing_density(_surmise_samples(99, seed=14))

    @pytest.mark.slow
    def test_pooled_goe_spacings(self) -> None:
        """Test pooled goe spacings against the surmise."""
        pooled = []
        for seed in range(50):
            eigs = eigenvalues_sym(goe_matrix(196, seed), "lapack")
            unfolded = unfold_eigenvalues(eigs)
            assert unfolded.unfolding_degree == 5
            assert float(np.mean(unfolded.spacings)) == pytest.approx(1.0, abs=0.05)
            pooled.append(unfolded.spacings)
        spacings = np.concatenate(pooled)
        assert spacings.size == 50 * 195
        assert float(np.mean(spacings)) == pytest.approx(1.0, abs=0.05)
        assert stats.kstest(spacings, wigner_cdf).statistic <= 0.03
        fit = fit_spacing_density(spacings)
        assert fit.a == pytest.approx(math.pi / 2, rel=0.05)
        assert fit.b == pytest.approx(math.pi / 4, rel=0.05)
        assert fit.ks_stat <= 0.03


class TestScaleSweep:
    """Test analyse_scale and scale_sweep."""

    def test_single_scale(self) -> None:
        """Test the chain on a small noise panel."""
        result = analyse_scale(_panel(wishart_panel(40, 800, seed=15), scale=3))
        assert result.ok
        assert result.scale == 3
        assert result.eigenvalues.size == 40
        assert result.spacings.size == 39
        assert result.goe is None
        assert 0.0 <= result.inside_fraction <= 1.0

    def test_goe_fit_when_enough_spacings(self) -> None:
        """Test that the surmise fit runs with at least 100 spacings."""
        settings = RmtSettings(eigensolver="lapack")
        result = analyse_scale(_panel(wishart_panel(150, 3000, seed=16)), settings)
        assert result.goe is not None
        assert result.goe.a > 0.0 and result.goe.b > 0.0

    def test_needs_two_scales(self) -> None:
        """Test that one panel is not a sweep."""
        with pytest.raises(ConstraintError):
            _ = scale_sweep([_panel(wishart_panel(30, 300, seed=1))])

    def test_failure_recorded(self) -> None:
        """Test that a failing scale is recorded and the rest still run."""
        broken = wishart_panel(30, 300, seed=2)
        broken[4] = 0.0
        report = scale_sweep(
            [
                _panel(wishart_panel(30, 300, seed=3), scale=2),
                _panel(broken, scale=1),
                _panel(wishart_panel(30, 300, seed=4), scale=3),
            ]
        )
        assert [r.scale for r in report.results] == [1, 2, 3]
        assert report.partial
        assert [r.scale for r in report.failed] == [1]
        error = report.results[0].error
        assert error is not None and "S004" in error and "scale=1" in error

    def test_perfect_correlation_recorded(self) -> None:
        """Test that an ill-conditioned unfolding fails only its scale."""
        row = white_noise(300, seed=5)
        report = scale_sweep(
            [
                _panel(np.tile(row, (30, 1)), scale=1),
                _panel(wishart_panel(30, 300, seed=6), scale=2),
            ]
        )
        failed = report.results[0]
        assert not failed.ok
        assert failed.eigenvalues[-1] == pytest.approx(30.0, abs=1e-9)
        np.testing.assert_allclose(failed.eigenvalues[:-1], 0.0, atol=1e-9)
        assert failed.mp is not None
        assert failed.inside_fraction == pytest.approx(0.0)
        assert report.results[1].ok

    def test_parallel_matches_sequential(self) -> None:
        """Test that worker count does not change the results."""
        panels = [_panel(wishart_panel(25, 400, seed), scale=seed) for seed in (1, 2, 3)]
        sequential = scale_sweep(panels)
        parallel = scale_sweep(panels, workers=3)
        for a, b in zip(sequential.results, parallel.results, strict=True):
            np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)

    def test_chi_square_table(self) -> None:
        """Test the merged chi-square bins."""
        corr = correlation_matrix(wishart_panel(100, 1000, seed=17))
        eigs = eigenvalues_sym(corr, "lapack")
        chi = mp_chi_square(eigs, mp_bounds(corr.ratio))
        assert chi.bins >= 2
        assert chi.dof == chi.bins - 1
        assert 0.0 <= chi.pvalue <= 1.0
