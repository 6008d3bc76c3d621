import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etmsim.amplitude import (
    PairAmplitude,
    SingleElectronAmplitude,
    amplitude_cross_section,
    build_amplitude,
    cross_section_extent,
    export_amplitude_csv,
)
from etmsim.errors import NumericalError
from etmsim.params import ChiModel, ControlParams, GridSpec, momentum_grid, quadrature_grid


def small_params(T_I=1e-3, sigma_e=2.0, n=48, nq=129, **chi_kwargs):
    chi = ChiModel(**chi_kwargs) if chi_kwargs else ChiModel()
    return ControlParams(
        T_I=T_I, sigma_e=sigma_e, chi=chi, grid=GridSpec(n_points=n, q_points=nq)
    )


def brute_force_amplitude(params):
    """Literal triple-loop evaluation of the quadrature sum, kept independent
    of the production code paths (scalar math, no kernel table)."""
    grid = momentum_grid(params)
    quad = quadrature_grid(params)
    c_s = 2.0 * math.pi * params.T_I
    chi = params.chi
    s2 = params.sigma_e**2

    def alpha(k):
        return math.exp(-(k**2) / (4.0 * s2))

    def chi_scalar(q):
        g2 = chi.width**2
        lor = g2 / ((q - chi.center) ** 2 + g2) + g2 / ((q + chi.center) ** 2 + g2)
        return lor * math.exp(-4.0 * math.pi * chi.evanescent_scale * abs(q))

    n = grid.n
    raw = np.zeros((n, n))
    for i in range(n):
        k1 = grid.points[i]
        for j in range(n):
            k2 = grid.points[j]
            acc = 0.0
            for q, w in zip(quad.nodes, quad.weights):
                x = c_s * q * (k1 - k2)
                kernel = math.sin(x) / x if x != 0.0 else 1.0
                acc += w * kernel * alpha(k1 - q) * chi_scalar(q) * alpha(k2 + q)
            raw[i, j] = acc
    raw /= math.sqrt(np.sum(raw**2) * grid.spacing**2)
    return raw


class TestBuildAgainstLiteralSum:
    def test_matches_brute_force(self):
        params = small_params(T_I=2e-3, sigma_e=1.5, n=12, nq=33)
        amp = build_amplitude(params)
        expected = brute_force_amplitude(params)
        assert np.max(np.abs(amp.values.real - expected)) < 1e-10
        assert np.max(np.abs(amp.values.imag)) == 0.0

    def test_build_is_deterministic(self):
        params = small_params(n=32, nq=65)
        a = build_amplitude(params)
        b = build_amplitude(params)
        assert np.array_equal(a.values, b.values)
        assert a.norm_constant == b.norm_constant


class TestInvariants:
    def test_unit_norm(self):
        amp = build_amplitude(small_params(n=64, nq=129))
        total = np.sum(np.abs(amp.values) ** 2) * amp.grid.spacing**2
        assert abs(total - 1.0) < 1e-10

    def test_exchange_symmetry(self):
        amp = build_amplitude(small_params(n=48, nq=129))
        assert np.max(np.abs(amp.values - amp.values.T)) < 1e-10

    def test_quadrature_doubling_changes_little(self):
        # at the default node density; coarser quadratures sit above 1e-6
        base = build_amplitude(small_params(n=48, nq=1024))
        fine = build_amplitude(small_params(n=48, nq=2048))
        scale = np.max(np.abs(base.values))
        assert np.max(np.abs(fine.values - base.values)) / scale < 1e-6

    def test_envelope_rescaling_is_absorbed_by_normalization(self):
        params = small_params(n=32, nq=65)

        class Scaled(SingleElectronAmplitude):
            def evaluate(self, k):
                return 2.0 * super().evaluate(k)

        plain = build_amplitude(params)
        scaled = build_amplitude(
            params, alpha1=Scaled(params.sigma_e), alpha2=Scaled(params.sigma_e)
        )
        assert np.max(np.abs(plain.values - scaled.values)) < 1e-14

    @given(
        T_I=st.floats(1e-5, 3e-2),
        sigma_e=st.floats(0.2, 3.0),
        kind=st.sampled_from(["lorentzian-pair", "gaussian-pair"]),
        width=st.floats(0.05, 0.3),
    )
    @settings(max_examples=15)
    def test_randomized_norm_and_symmetry(self, T_I, sigma_e, kind, width):
        params = ControlParams(
            T_I=T_I,
            sigma_e=sigma_e,
            chi=ChiModel(kind=kind, width=width),
            grid=GridSpec(n_points=24, q_points=65),
        )
        amp = build_amplitude(params)
        total = np.sum(np.abs(amp.values) ** 2) * amp.grid.spacing**2
        assert abs(total - 1.0) < 1e-10
        assert np.max(np.abs(amp.values - amp.values.T)) < 1e-10


def grid_schmidt_number(amp: PairAmplitude) -> float:
    # independent of the decomposition module: singular values of Phi*dk
    s = np.linalg.svd(amp.values * amp.grid.spacing, compute_uv=False)
    p = s**2
    return 1.0 / float(np.sum(p**2))


class TestLimits:
    def test_zero_exchange_limit_is_separable(self):
        params = ControlParams(
            T_I=1e-8,
            sigma_e=1.0,
            chi=ChiModel(kind="flat-band", center=0.0, width=1e-6),
            grid=GridSpec(n_points=64, q_points=33),
        )
        amp = build_amplitude(params)
        assert abs(grid_schmidt_number(amp) - 1.0) < 1e-6

    def test_moderate_coupling_stays_near_separable(self):
        # default coupling at T_I = 1e-3, sigma_e = 2 barely entangles the pair
        amp = build_amplitude(small_params(n=160, nq=257))
        kappa = grid_schmidt_number(amp)
        assert 1.0 <= kappa < 1.5

    def test_nonfinite_build_is_reported_with_indices(self):
        with pytest.raises(NumericalError, match=r"\(\d+, \d+\)"):
            build_amplitude(small_params(T_I=1e308, n=16, nq=33))


class TestCrossSections:
    def test_axis_validation(self):
        amp = build_amplitude(small_params(n=16, nq=33))
        with pytest.raises(ValueError, match="antidiagonal"):
            amplitude_cross_section(amp, axis="rows")

    def test_correlated_state_is_antidiagonal_dominant(self):
        # strong coupling regime: narrow envelopes, structure from chi
        params = ControlParams(
            T_I=1e-5,
            sigma_e=0.05,
            chi=ChiModel(),
            grid=GridSpec(n_points=200, q_points=257),
        )
        amp = build_amplitude(params)
        kd, vd = amplitude_cross_section(amp, "diagonal")
        ka, va = amplitude_cross_section(amp, "antidiagonal")
        ratio = cross_section_extent(kd, vd) / cross_section_extent(ka, va)
        assert ratio < 1.0

    def test_extent_of_gaussian_cut_matches_fwhm(self):
        x = np.linspace(-5, 5, 4001)
        sigma = 0.7
        width = cross_section_extent(x, np.exp(-(x**2) / (2 * sigma**2)))
        assert width == pytest.approx(2.0 * math.sqrt(2.0 * math.log(2.0)) * sigma, rel=1e-4)


class TestExport:
    def test_csv_round_trip(self, tmp_path):
        params = small_params(n=12, nq=33)
        amp = build_amplitude(params)
        out = tmp_path / "amplitude.csv"
        written = export_amplitude_csv(amp, out)
        assert [str(out), str(tmp_path / "amplitude.meta.json")] == written

        lines = out.read_text().splitlines()
        assert lines[0] == "k1,k2,re,im"
        assert len(lines) == 1 + 12 * 12
        i, j = 3, 7
        row = lines[1 + i * 12 + j].split(",")
        assert float(row[0]) == amp.grid.points[i]
        assert float(row[1]) == amp.grid.points[j]
        assert float(row[2]) == amp.values[i, j].real
        assert float(row[3]) == amp.values[i, j].imag

        meta = json.loads((tmp_path / "amplitude.meta.json").read_text())
        assert meta["norm_constant"] == amp.norm_constant
        assert meta["grid"]["n_points"] == 12
        assert meta["params"]["sigma_e"] == params.sigma_e
        assert meta["quadrature"]["edge_weight_ratio"] <= 1e-6
