import numpy as np
import pytest

from sgfdkit.errors import CoefficientError, ConfigError, ModelError
from sgfdkit.model import (
    GridGeometry,
    SimulationConfig,
    SourceSpec,
    SpongeSpec,
    StencilCoefficients,
    allocate_state,
    build_model,
)
from sgfdkit.coefficients import TABLE1_WEIGHTS, taylor_coefficients


def uniform(value, shape=(12, 12)):
    return np.full(shape, float(value))


class TestBuildModel:
    def test_homogeneous_reference_values(self):
        # alpha=1732.1, beta=1000, rho=1000: mu = 1.0e9 Pa, lam+2mu = rho*alpha^2
        m = build_model(uniform(1732.1), uniform(1000.0), uniform(1000.0))
        assert m.mu == pytest.approx(1.0e9, rel=1e-12)
        assert (m.lam + 2 * m.mu) == pytest.approx(1000.0 * 1732.1**2, rel=1e-12)

    def test_acoustic_degenerate_case(self):
        with pytest.warns(UserWarning, match="acoustic"):
            m = build_model(uniform(1500.0), uniform(0.0), uniform(1000.0))
        assert m.has_acoustic_regions
        assert np.all(m.mu == 0.0)
        assert m.lam == pytest.approx(1000.0 * 1500.0**2, rel=1e-12)

    def test_equal_velocities_rejected(self):
        with pytest.raises(ModelError, match="below P velocity"):
            build_model(uniform(1000.0), uniform(1000.0), uniform(1000.0))

    def test_shape_mismatch(self):
        with pytest.raises(ModelError, match="shape"):
            build_model(uniform(2000.0, (10, 10)), uniform(1000.0, (10, 11)), uniform(1000.0, (10, 10)))

    @pytest.mark.parametrize("rho", [0.0, -1.0])
    def test_nonpositive_density(self, rho):
        with pytest.raises(ModelError, match="density"):
            build_model(uniform(2000.0), uniform(1000.0), uniform(rho))

    def test_nonpositive_vp(self):
        with pytest.raises(ModelError, match="P velocity"):
            build_model(uniform(0.0), uniform(0.0), uniform(1000.0))

    def test_negative_vs(self):
        with pytest.raises(ModelError, match="non-negative"):
            build_model(uniform(2000.0), uniform(-1.0), uniform(1000.0))

    def test_velocity_round_trip(self, rng):
        vp = 2000.0 + 1500.0 * rng.random((20, 17))
        vs = vp * (0.3 + 0.3 * rng.random((20, 17)))
        rho = 1500.0 + 1000.0 * rng.random((20, 17))
        m = build_model(vp, vs, rho)
        np.testing.assert_allclose(m.alpha(), vp, rtol=1e-12)
        np.testing.assert_allclose(m.beta(), vs, rtol=1e-12)


class TestGeometryAndState:
    def test_bad_spacing(self):
        with pytest.raises(ModelError, match="spacing"):
            GridGeometry(nx=10, nz=10, h=0.0)

    def test_fresh_state_is_exactly_zero(self):
        state = allocate_state(GridGeometry(100, 100, 10.0), m=7)
        assert state.time_index == 0
        for name, f in state.fields():
            assert f.shape == (100, 100)
            assert f.dtype == np.float32
            assert np.abs(f).max() == 0.0

    def test_minimal_grid_accepted(self):
        allocate_state(GridGeometry(16, 16, 10.0), m=7)  # 2M+2

    def test_too_small_grid_rejected(self):
        with pytest.raises(ModelError, match="too small"):
            allocate_state(GridGeometry(15, 15, 10.0), m=7)  # 2M+1


class TestStencilCoefficients:
    def test_leading_weight_must_be_positive(self):
        with pytest.raises(CoefficientError, match="leading weight"):
            StencilCoefficients(m=1, c=(-1.0,), provenance="user")

    def test_builtin_sign_pattern_enforced(self):
        with pytest.raises(CoefficientError, match="alternate"):
            StencilCoefficients(m=3, c=(1.4, 0.16, 0.017), provenance="table1")

    def test_user_sign_pattern_warns_only(self):
        with pytest.warns(UserWarning, match="alternate"):
            StencilCoefficients(m=3, c=(1.171875, 0.0651, 0.0046875), provenance="user")

    def test_taylor_residual_high_order_decay(self):
        # exact first moment: residual ~ kh^(2m+1); at kh = 1e-3 it rounds to
        # exactly zero for m >= 3, so probe the order at larger kh
        c = taylor_coefficients(2)
        r_big = abs(c.residual_vs_kh(0.2))
        r_small = abs(c.residual_vs_kh(0.1))
        assert r_small < r_big / 20  # order >= ~4.3, i.e. beyond quadratic
        assert abs(taylor_coefficients(4).residual_vs_kh(1e-3)) == 0.0

    def test_table1_residual_small_at_long_wavelengths(self):
        c = StencilCoefficients(m=3, c=TABLE1_WEIGHTS[3], provenance="table1")
        for kh in (1e-3, 1e-4):
            assert abs(c.residual_vs_kh(kh)) <= 1e-2 * kh

    def test_first_moment(self):
        assert taylor_coefficients(5).first_moment() == pytest.approx(1.0, abs=1e-12)


class TestSourceAndConfig:
    def geometry(self):
        return GridGeometry(120, 120, 10.0)

    def source(self, **kw):
        base = dict(ix=60, iz=60, f0=14.0, t0=0.1)
        base.update(kw)
        return SourceSpec(**base)

    def config(self, **kw):
        from sgfdkit.coefficients import table1_coefficients

        base = dict(
            geometry=self.geometry(),
            dt=1e-3,
            nt=10,
            scheme="non_balanced",
            coeffs=table1_coefficients(7),
            source=self.source(),
            receivers=((60, 40),),
        )
        base.update(kw)
        return SimulationConfig(**base)

    def test_bad_frequency(self):
        with pytest.raises(ConfigError, match="frequency"):
            self.source(f0=0.0)

    def test_truncation_warning(self):
        with pytest.warns(UserWarning, match="truncated"):
            self.source(t0=0.01)

    def test_bad_mechanism(self):
        with pytest.raises(ConfigError, match="mechanism"):
            self.source(mechanism="downward_poke")

    def test_valid_config(self):
        self.config()

    def test_source_in_sponge_rejected(self):
        with pytest.raises(ConfigError, match="source"):
            self.config(source=self.source(ix=20))

    def test_receiver_in_sponge_rejected(self):
        with pytest.raises(ConfigError, match="receiver 0"):
            self.config(receivers=((60, 25),))

    def test_bad_dt(self):
        with pytest.raises(ConfigError, match="time step"):
            self.config(dt=0.0)

    def test_negative_nt(self):
        with pytest.raises(ConfigError, match=">= 0"):
            self.config(nt=-1)

    def test_unknown_scheme(self):
        with pytest.raises(ConfigError, match="scheme"):
            self.config(scheme="imbalanced")

    def test_unknown_component(self):
        with pytest.raises(ConfigError, match="component"):
            self.config(component="pressure")

    def test_oversized_sponge(self):
        with pytest.raises(ConfigError, match="sponge width"):
            self.config(sponge=SpongeSpec(width=60))

    def test_bad_sponge_decay(self):
        with pytest.raises(ConfigError, match="decay"):
            SpongeSpec(width=10, decay=0.0)
