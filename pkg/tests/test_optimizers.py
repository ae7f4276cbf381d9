import numpy as np
import pytest

from normdescent import ema, models, norms, optimizers
from normdescent.params import Layout, LayoutError, ParamVector


def flat(values):
    arr = np.asarray(values, dtype=np.float64)
    return ParamVector(arr, Layout([("x", "vector", (arr.size,))]))


CONST = optimizers.Constant(1.0)


class TestSchedules:
    def test_power_decay_values(self):
        sched = optimizers.PowerDecay(eta0=2.0, exponent=0.8, t_init=1.0)
        assert sched.eta(0.0) == 2.0
        assert sched.eta(9.0) == pytest.approx(2.0 * 10.0**-0.8)

    def test_validation(self):
        with pytest.raises(ValueError):
            optimizers.PowerDecay(eta0=-1.0)
        with pytest.raises(ValueError):
            optimizers.PowerDecay(eta0=1.0, exponent=1.0)
        with pytest.raises(ValueError):
            optimizers.PowerDecay(eta0=1.0, t_init=0.0)
        with pytest.raises(ValueError):
            optimizers.Adam(c1=0.001, c2=0.1)


class TestSdStep:
    def test_normalized_l2(self):
        spec = optimizers.SD(norms.L2())
        state = optimizers.init_state(spec, flat([0.0, 0.0]))
        state, info = optimizers.step(spec, state, flat([3.0, 4.0]), CONST, 1.0)
        np.testing.assert_allclose(state.theta.data, [-0.6, -0.8])
        assert not info.degenerate
        assert state.t == 1.0 and state.int_eta == 1.0 and state.step_index == 1

    def test_unnormalized_scales_by_dual(self):
        spec = optimizers.SD(norms.L2(), normalized=False)
        state = optimizers.init_state(spec, flat([0.0, 0.0]))
        state, _ = optimizers.step(spec, state, flat([3.0, 4.0]), CONST, 1.0)
        np.testing.assert_allclose(state.theta.data, [-3.0, -4.0])

    def test_zero_gradient_holds_theta(self):
        spec = optimizers.SD(norms.L2())
        state = optimizers.init_state(spec, flat([1.0, 2.0]))
        state, info = optimizers.step(spec, state, flat([0.0, 0.0]), CONST, 1.0)
        np.testing.assert_array_equal(state.theta.data, [1.0, 2.0])
        assert info.degenerate and state.step_index == 1

    def test_nan_gradient_rejected(self):
        spec = optimizers.SD(norms.L2())
        state = optimizers.init_state(spec, flat([0.0, 0.0]))
        with pytest.raises(optimizers.NonFiniteUpdateError):
            optimizers.step(spec, state, flat([np.nan, 1.0]), CONST, 1.0)


class TestMsdStep:
    def test_signum_first_step(self):
        spec = optimizers.MSD(norms.Linf(), c1=-np.log(0.9))
        state = optimizers.init_state(spec, flat([0.0, 0.0]))
        state, _ = optimizers.step(spec, state, flat([2.0, -1.0]), CONST, 1.0)
        np.testing.assert_allclose(state.m.value, [0.2, -0.1], rtol=1e-12)
        np.testing.assert_allclose(state.theta.data, [-1.0, 1.0])

    def test_momentum_direction_not_gradient(self):
        spec = optimizers.MSD(norms.Linf(), c1=-np.log(0.9))
        state = optimizers.init_state(spec, flat([0.0]))
        state, _ = optimizers.step(spec, state, flat([10.0]), CONST, 1.0)
        # new gradient flips sign but momentum keeps the old direction
        state, _ = optimizers.step(spec, state, flat([-0.5]), CONST, 1.0)
        assert state.m.value[0] > 0
        np.testing.assert_allclose(state.theta.data, [-2.0])

    def test_muon_diag_momentum(self):
        layout = Layout([("W", "matrix", (2, 2))])
        spec = optimizers.MSD(norms.SpectralPerMatrix(), c1=1e9)  # momentum ~ gradient
        state = optimizers.init_state(spec, ParamVector.zeros(layout))
        g = ParamVector(np.diag([3.0, 2.0]).ravel(), layout)
        state, _ = optimizers.step(spec, state, g, CONST, 1.0)
        np.testing.assert_allclose(state.theta.view("W"), -np.eye(2), atol=1e-9)

    def test_zero_gradient_zero_momentum_holds(self):
        spec = optimizers.MSD(norms.L2())
        state = optimizers.init_state(spec, flat([1.0]))
        state, info = optimizers.step(spec, state, flat([0.0]), CONST, 1.0)
        assert info.degenerate
        np.testing.assert_array_equal(state.theta.data, [1.0])


class TestAdamStep:
    def test_constant_gradient_becomes_sign(self):
        spec = optimizers.Adam()
        state = optimizers.init_state(spec, flat([0.0, 0.0]))
        g = flat([0.7, -0.2])
        sched = optimizers.Constant(0.5)
        for _ in range(50):
            state, _ = optimizers.step(spec, state, g, sched, 1.0)
        delta = state.theta.data / (-0.5 * 50)
        np.testing.assert_allclose(delta, np.sign(g.data), rtol=1e-6)

    def test_first_step_is_exact_sign(self):
        # bias correction makes m_hat = g and v_hat = g^2 after one update
        spec = optimizers.Adam()
        state = optimizers.init_state(spec, flat([4.0, -9.0]))
        state, _ = optimizers.step(spec, state, flat([0.5, -3.0]), CONST, 1.0)
        np.testing.assert_allclose(state.theta.data, [3.0, -8.0], rtol=1e-9)

    def test_eps_zero_holds_silent_coordinates(self):
        spec = optimizers.Adam(eps=0.0)
        state = optimizers.init_state(spec, flat([1.0, 1.0]))
        state, _ = optimizers.step(spec, state, flat([1.0, 0.0]), CONST, 1.0)
        assert state.theta.data[1] == 1.0
        assert state.theta.data[0] == pytest.approx(0.0)

    def test_update_magnitude_bound(self):
        # uniform ratio bound times the bias-correction factor, 1.01 slack
        rng = np.random.default_rng(0)
        spec = optimizers.Adam()
        bound = ema.adam_ratio_bound(spec.c1, spec.c2)
        state = optimizers.init_state(spec, flat(np.zeros(6)))
        sched = optimizers.Constant(0.3)
        for _ in range(400):
            prev = state.theta.data
            state, info = optimizers.step(spec, state, flat(rng.normal(size=6)), sched, 1.0)
            q = np.sqrt(1.0 - np.exp(-spec.c2 * state.t)) / (1.0 - np.exp(-spec.c1 * state.t))
            cap = 1.01 * 0.3 * bound * q
            assert np.max(np.abs(state.theta.data - prev)) <= cap


class TestComposite:
    def setup_method(self):
        self.layout = Layout([("W", "matrix", (2, 3)), ("u", "vector", (4,))])

    def test_partition_required(self):
        spec = optimizers.Composite(
            parts=(optimizers.CompositePart(("W",), 1.0, optimizers.MSD(norms.SpectralPerMatrix())),)
        )
        with pytest.raises(LayoutError):
            optimizers.init_state(spec, ParamVector.zeros(self.layout))

    def test_group_scales_apply(self):
        spec = optimizers.Composite(
            parts=(
                optimizers.CompositePart(("W",), 2.0, optimizers.SD(norms.L2())),
                optimizers.CompositePart(("u",), 0.5, optimizers.SD(norms.Linf())),
            )
        )
        state = optimizers.init_state(spec, ParamVector.zeros(self.layout))
        g = ParamVector.zeros(self.layout)
        g.view("W")[0, 0] = 3.0
        g.view("u")[...] = [1.0, -1.0, 2.0, 0.0]
        state, _ = optimizers.step(spec, state, g, CONST, 1.0)
        assert state.theta.view("W")[0, 0] == pytest.approx(-2.0)
        np.testing.assert_allclose(state.theta.view("u"), [-0.5, 0.5, -0.5, 0.0])

    def test_equal_scale_msd_parts_match_max_norm_duality(self):
        rng = np.random.default_rng(1)
        c1 = -np.log(0.9)
        spec = optimizers.Composite(
            parts=(
                optimizers.CompositePart(("W",), 1.0, optimizers.MSD(norms.SpectralPerMatrix(), c1=c1)),
                optimizers.CompositePart(("u",), 1.0, optimizers.MSD(norms.Linf(), c1=c1)),
            )
        )
        for _ in range(20):
            state = optimizers.init_state(
                spec, ParamVector(rng.normal(size=self.layout.size), self.layout)
            )
            g = ParamVector(rng.normal(size=self.layout.size), self.layout)
            prev = state.theta.data.copy()
            state, _ = optimizers.step(spec, state, g, CONST, 1.0)
            delta = state.theta.data - prev
            # momentum after the update is the direction source
            m = np.concatenate(
                [np.asarray(part_state.m.value).ravel() for part_state in state.parts]
            )
            m_pv = ParamVector(m, self.layout)
            dual_sum = np.linalg.svd(m_pv.view("W"), compute_uv=False).sum() + np.abs(
                m_pv.view("u")
            ).sum()
            assert delta @ m == pytest.approx(-dual_sum, rel=1e-9)


class TestInvariants:
    @pytest.mark.parametrize(
        "norm_spec", [norms.L1(), norms.L2(), norms.Linf()], ids=["l1", "l2", "linf"]
    )
    def test_normalized_step_length_is_one(self, norm_spec):
        rng = np.random.default_rng(2)
        for variant in ("sd", "msd"):
            spec = (
                optimizers.SD(norm_spec)
                if variant == "sd"
                else optimizers.MSD(norm_spec, c1=0.3)
            )
            state = optimizers.init_state(spec, flat(rng.normal(size=8)))
            sched = optimizers.PowerDecay(eta0=0.7, exponent=0.8)
            for _ in range(10):
                eta = sched.eta(state.t)
                prev = state.theta.data.copy()
                state, _ = optimizers.step(spec, state, flat(rng.normal(size=8)), sched, 1.0)
                step_norm = norms.norm(norm_spec, flat((state.theta.data - prev) / eta))
                assert step_norm == pytest.approx(1.0, rel=1e-9)

    def test_descent_coupling_normalized_sd(self):
        rng = np.random.default_rng(3)
        spec = optimizers.SD(norms.Linf())
        sched = optimizers.Constant(0.4)
        state = optimizers.init_state(spec, flat(rng.normal(size=10)))
        for _ in range(20):
            g = flat(rng.normal(size=10))
            prev = state.theta.data.copy()
            state, _ = optimizers.step(spec, state, g, sched, 1.0)
            lhs = (state.theta.data - prev) @ g.data
            assert lhs == pytest.approx(-0.4 * np.abs(g.data).sum(), rel=1e-9)

    def test_int_eta_accumulates_reference_schedule(self):
        spec = optimizers.SD(norms.L2())
        sched = optimizers.PowerDecay(eta0=1.0, exponent=0.8)
        state = optimizers.init_state(spec, flat([1.0, 1.0]))
        rng = np.random.default_rng(4)
        expected = 0.0
        for n in range(5):
            expected += sched.eta(float(n))
            state, _ = optimizers.step(spec, state, flat(rng.normal(size=2)), sched, 1.0)
        assert state.int_eta == pytest.approx(expected, rel=1e-12)


class TestBuildMuonAdam:
    def setup_method(self):
        self.layout = models.layout_for(models.TwoLayer(4, 6, 2.0))

    def test_equal_rates_give_plain_max_norm(self):
        spec, margin = optimizers.build_muon_adam(self.layout, 0.1, 0.1)
        assert margin.parts[0].scale == pytest.approx(1.0)
        assert margin.parts[1].scale == pytest.approx(1.0)
        assert isinstance(spec.parts[0].spec, optimizers.MSD)
        assert isinstance(spec.parts[1].spec, optimizers.Adam)

    def test_scale_is_rate_ratio(self):
        _, margin = optimizers.build_muon_adam(self.layout, eta0_matrix=0.1, eta0_vector=0.5)
        assert margin.parts[0].scale == pytest.approx(5.0)

    def test_margin_norm_dual_is_scaled_nuclear_plus_l1(self):
        _, margin = optimizers.build_muon_adam(self.layout, eta0_matrix=0.1, eta0_vector=0.5)
        rng = np.random.default_rng(5)
        g = ParamVector(rng.normal(size=self.layout.size), self.layout)
        expected = np.linalg.svd(g.view("W"), compute_uv=False).sum() / 5.0 + np.abs(
            g.view("u")
        ).sum()
        assert norms.dual_norm(margin, g) == pytest.approx(expected, rel=1e-9)

    def test_requires_both_group_kinds(self):
        only_matrix = Layout([("W", "matrix", (2, 2))])
        with pytest.raises(LayoutError):
            optimizers.build_muon_adam(only_matrix, 0.1, 0.1)
        only_vector = Layout([("u", "vector", (3,))])
        with pytest.raises(LayoutError):
            optimizers.build_muon_adam(only_vector, 0.1, 0.1)

    def test_implied_norm_matches_built_margin_norm(self):
        spec, margin = optimizers.build_muon_adam(self.layout, 0.2, 0.4)
        implied = optimizers.implied_norm(spec, self.layout)
        rng = np.random.default_rng(6)
        pv = ParamVector(rng.normal(size=self.layout.size), self.layout)
        assert norms.norm(implied, pv) == pytest.approx(norms.norm(margin, pv), rel=1e-12)
        assert norms.dual_norm(implied, pv) == pytest.approx(
            norms.dual_norm(margin, pv), rel=1e-12
        )
