import numpy as np
import pytest
from scipy.linalg import expm

from semicav.fockspace import CompositeSpace, FockBasis
from semicav.phasespace import PhaseGrid, SemiclassicalObservable
from semicav.swe import (
    FieldSample,
    GridOptions,
    GridStepper,
    SemiclassicalWave,
    compare_to_oracle,
    conditional_state,
    evaluate_on_grid,
    evolve_swe,
    field_density,
    initial_wave,
    project_to_coefficients,
    sample_field,
    step_bargmann,
    step_grid,
    swe_expectation,
)
from semicav.unitary import (
    AtomFieldModel,
    TimeGrid,
    evolve_unitary,
    product_initial_state,
    two_level_model,
)

EXCITED = np.array([1.0, 0.0], dtype=complex)
GROUND = np.array([0.0, 1.0], dtype=complex)


@pytest.fixture(scope="module")
def grid64():
    return PhaseGrid(5.0, 64)


def analytic_rabi_wave(grid, t, g=1.0):
    """Closed-form field of the resonant one-excitation exchange."""
    a = grid.nodes()
    env = np.exp(-0.5 * np.abs(a) ** 2) / np.sqrt(np.pi)
    values = np.zeros((grid.M, grid.M, 2), dtype=complex)
    values[:, :, 0] = np.cos(g * t) * env
    values[:, :, 1] = -1j * np.sin(g * t) * np.conj(a) * env
    return values


def zero_current_model():
    return AtomFieldModel(2, h_ato=np.diag([0.5, -0.5]), j=np.zeros((2, 2)), omega=1.0)


class TestInitialWave:
    def test_peak_value(self, grid64):
        wave = initial_wave(EXCITED, grid64)
        center = grid64.M // 2
        assert np.linalg.norm(wave.values[center, center]) == pytest.approx(
            1.0 / np.sqrt(np.pi), abs=1e-12)

    def test_total_probability(self, grid64):
        wave = initial_wave(EXCITED, grid64)
        assert wave.total_probability() == pytest.approx(1.0, abs=grid64.tol)

    def test_density_is_vacuum_q_function(self, grid64):
        dens = field_density(initial_wave(EXCITED, grid64))
        expected = np.exp(-np.abs(grid64.nodes()) ** 2) / np.pi
        assert np.max(np.abs(dens.values - expected)) <= 1e-12

    def test_bargmann_coefficients(self):
        wave = initial_wave(GROUND, FockBasis(6))
        np.testing.assert_allclose(wave.coeffs[0], GROUND)
        assert np.max(np.abs(wave.coeffs[1:])) == 0.0

    def test_rejects_unnormalized(self, grid64):
        with pytest.raises(ValueError):
            initial_wave(2.0 * EXCITED, grid64)


class TestBargmannStepper:
    def test_zero_current_is_static(self):
        wave = initial_wave(EXCITED, FockBasis(6))
        stepped = step_bargmann(zero_current_model(), wave, 0.0, 1e-2)
        np.testing.assert_allclose(stepped.coeffs, wave.coeffs, atol=1e-15)

    def test_resonant_rabi_coefficients(self):
        model = two_level_model(g=1.0)
        wave = initial_wave(EXCITED, FockBasis(6))
        dt = 1e-3
        for step in range(1000):
            wave = step_bargmann(model, wave, step * dt, dt)
        t = 1.0
        np.testing.assert_allclose(wave.coeffs[0], np.cos(t) * EXCITED, atol=1e-8)
        np.testing.assert_allclose(wave.coeffs[1], -1j * np.sin(t) * GROUND, atol=1e-8)
        assert wave.total_probability() == pytest.approx(1.0, abs=1e-9)

    def test_truncation_overflow_raises(self):
        # a cascade atom emits two photons, overflowing a 3-level mode
        lower = np.zeros((3, 3), dtype=complex)
        lower[1, 0] = lower[2, 1] = 1.0
        model = AtomFieldModel(3, h_ato=np.zeros((3, 3)), j=lower, omega=0.0)
        psi0 = np.array([1.0, 0.0, 0.0], dtype=complex)
        wave = initial_wave(psi0, FockBasis(2))
        with pytest.raises(RuntimeError, match="truncation"):
            t = 0.0
            for _ in range(2000):
                wave = step_bargmann(model, wave, t, 1e-3)
                t += 1e-3

    def test_probability_conserved_per_unit_time(self):
        model = two_level_model(g=1.0, detuning=0.5)
        wave = initial_wave(EXCITED, FockBasis(6))
        t = 0.0
        for _ in range(1000):
            wave = step_bargmann(model, wave, t, 1e-3)
            t += 1e-3
        assert abs(wave.total_probability() - 1.0) <= 1e-9


class TestGridStepper:
    def test_zero_current_is_static(self, grid64):
        wave = initial_wave(EXCITED, grid64)
        stepped = step_grid(zero_current_model(), wave, 0.0, 1e-2)
        np.testing.assert_allclose(stepped.values, wave.values, atol=1e-14)

    def test_multiplication_term_is_node_local(self, grid64):
        # with the adjoint coupling artificially removed the dynamics is a
        # pointwise matrix exponential; on the real axis the generator is
        # Hermitian there, so the local norm is a constant of motion
        g = 1.0
        model = AtomFieldModel(2, h_ato=np.zeros((2, 2)),
                               j=g * np.array([[0.0, 1.0], [1.0, 0.0]]), omega=0.0)

        class LoweringOnly(GridStepper):
            def _coupling(self, t):
                jt, _ = super()._coupling(t)
                return jt, np.zeros_like(jt)

        # no derivative term survives, so the transverse damping is moot;
        # switching it off makes the node-local closed form exact
        stepper = LoweringOnly(model, grid64,
                               GridOptions(damping=0.0, check_boundary=False, norm_tol=1.0))
        wave = initial_wave(EXCITED, grid64)
        dt, n_steps = 1e-3, 100
        current = wave
        for step in range(n_steps):
            current = stepper.step(current, step * dt, dt)
        t = n_steps * dt
        a_conj = np.conj(grid64.nodes())
        expected = np.empty_like(wave.values)
        for ix in range(grid64.M):
            for iy in range(grid64.M):
                gen = -1j * t * a_conj[ix, iy] * model.j
                expected[ix, iy] = expm(gen) @ wave.values[ix, iy]
        assert np.max(np.abs(current.values - expected)) <= 1e-9
        # real-axis row: pure phase rotation, pointwise modulus preserved
        iy0 = grid64.M // 2
        before = np.linalg.norm(wave.values[:, iy0], axis=1)
        after = np.linalg.norm(current.values[:, iy0], axis=1)
        np.testing.assert_allclose(after, before, atol=1e-10)

    def test_matches_bargmann_backend(self, grid64):
        model = two_level_model(g=1.0)
        dt = 2e-3
        tgrid = TimeGrid(0.0, np.pi, np.pi / 1571, 1571)
        grid_run = evolve_swe(model, initial_wave(EXCITED, grid64), tgrid)
        barg_run = evolve_swe(model, initial_wave(EXCITED, FockBasis(8)), tgrid)
        barg_on_grid = evaluate_on_grid(barg_run[-1], grid64)
        scale = np.max(np.abs(barg_on_grid.values))
        diff = np.max(np.abs(grid_run[-1].values - barg_on_grid.values))
        assert diff <= 1e-3 * scale

    def test_boundary_guard_fires_on_small_grid(self):
        # a domain of radius 3 cannot hold the spreading component
        model = two_level_model(g=1.0)
        grid = PhaseGrid(3.0, 32)
        wave = initial_wave(EXCITED, grid)
        tgrid = TimeGrid(0.0, np.pi, 1e-3 * np.pi, 1000)
        with pytest.raises(RuntimeError, match="boundary"):
            evolve_swe(model, wave, tgrid, GridOptions(norm_tol=1.0))

    def test_finite_difference_switch(self, grid64):
        # second-order differences stay stable and roughly track spectral
        model = two_level_model(g=1.0)
        tgrid = TimeGrid(0.0, 0.5, 1e-3, 500)
        fd = evolve_swe(model, initial_wave(EXCITED, grid64), tgrid,
                        GridOptions(finite_differences=True, norm_tol=1e-2))
        exact = analytic_rabi_wave(grid64, 0.5)
        assert np.max(np.abs(fd[-1].values - exact)) <= 5e-2
        spectral = evolve_swe(model, initial_wave(EXCITED, grid64), tgrid)
        assert np.max(np.abs(spectral[-1].values - exact)) <= 1e-4


class TestRepresentationMaps:
    def test_initial_wave_evaluates_to_gaussian(self, grid64):
        barg = initial_wave(EXCITED, FockBasis(8))
        on_grid = evaluate_on_grid(barg, grid64)
        np.testing.assert_allclose(on_grid.values, initial_wave(EXCITED, grid64).values,
                                   atol=1e-14)

    def test_round_trip_projection(self):
        # the grid must cover the highest retained basis function
        grid = PhaseGrid(7.0, 128)
        rng = np.random.default_rng(13)
        coeffs = rng.normal(size=(9, 2)) + 1j * rng.normal(size=(9, 2))
        coeffs /= np.sqrt(np.sum(np.abs(coeffs) ** 2))
        barg = SemiclassicalWave("bargmann", time=0.0, basis=FockBasis(8), coeffs=coeffs)
        back = project_to_coefficients(evaluate_on_grid(barg, grid), FockBasis(8))
        np.testing.assert_allclose(back.coeffs, coeffs, atol=1e-8)

    def test_norm_preserved(self, grid64):
        barg = initial_wave(EXCITED, FockBasis(8))
        on_grid = evaluate_on_grid(barg, grid64)
        assert on_grid.total_probability() == pytest.approx(1.0, abs=grid64.tol)


class TestFieldDensity:
    def test_rabi_density_closed_form(self, grid64):
        model = two_level_model(g=1.0)
        t_end = 0.75
        tgrid = TimeGrid(0.0, t_end, 1e-3, 750)
        wave = evolve_swe(model, initial_wave(EXCITED, FockBasis(8)), tgrid)[-1]
        dens = field_density(wave, grid64)
        a = grid64.nodes()
        expected = (np.exp(-np.abs(a) ** 2) / np.pi) * (
            np.cos(t_end) ** 2 + np.abs(a) ** 2 * np.sin(t_end) ** 2)
        assert np.max(np.abs(dens.values - expected)) <= grid64.tol
        assert dens.values.min() >= 0.0
        assert dens.integral() == pytest.approx(1.0, abs=grid64.tol)


class TestConditionalState:
    def test_initial_wave_factorizes(self, grid64):
        wave = initial_wave(EXCITED, grid64)
        for a in (0.0, 1.0 + 0.5j, -2.0j):
            sample = conditional_state(wave, a)
            np.testing.assert_allclose(sample.conditional_state, EXCITED, atol=1e-12)

    def test_rabi_quarter_period_at_origin(self):
        model = two_level_model(g=1.0)
        tgrid = TimeGrid(0.0, np.pi / 4.0, np.pi / 4000.0, 1000)
        wave = evolve_swe(model, initial_wave(EXCITED, FockBasis(8)), tgrid)[-1]
        state = conditional_state(wave, 0.0).conditional_state
        assert abs(abs(state[0]) - 1.0) <= 1e-9

    def test_rabi_half_period_at_one(self):
        model = two_level_model(g=1.0)
        tgrid = TimeGrid(0.0, np.pi / 2.0, np.pi / 4000.0, 2000)
        wave = evolve_swe(model, initial_wave(EXCITED, FockBasis(8)), tgrid)[-1]
        state = conditional_state(wave, 1.0).conditional_state
        assert abs(abs(state[1]) - 1.0) <= 1e-9
        # the excited amplitude vanishes at the origin, so conditioning fails
        with pytest.raises(ValueError):
            conditional_state(wave, 0.0)


class TestExpectations:
    def test_unit_and_projector_and_second_moment(self, grid64):
        model = two_level_model(g=1.0)
        t_end = 1.2
        tgrid = TimeGrid(0.0, t_end, 1e-3, 1200)
        wave = evolve_swe(model, initial_wave(EXCITED, FockBasis(8)), tgrid)[-1]
        gwave = evaluate_on_grid(wave, grid64)
        one = SemiclassicalObservable.constant(1.0)
        assert swe_expectation(gwave, one) == pytest.approx(1.0, abs=1e-6)
        proj_e = SemiclassicalObservable.constant(1.0, atom_op=np.diag([1.0, 0.0]))
        assert swe_expectation(gwave, proj_e) == pytest.approx(np.cos(t_end) ** 2, abs=1e-6)
        abs_sq = SemiclassicalObservable.abs_square()
        assert swe_expectation(gwave, abs_sq) == pytest.approx(
            np.sin(t_end) ** 2 + 1.0, abs=1e-6)


class TestSampling:
    def test_initial_wave_second_moment(self, grid64):
        wave = initial_wave(EXCITED, grid64)
        samples = sample_field(wave, 100000, seed=42)
        mean = np.mean([abs(s.a) ** 2 for s in samples])
        assert abs(mean - 1.0) <= 0.02

    def test_estimate_matches_quadrature_within_errors(self, grid64):
        model = two_level_model(g=1.0)
        tgrid = TimeGrid(0.0, np.pi / 4.0, np.pi / 4000.0, 1000)
        wave = evolve_swe(model, initial_wave(EXCITED, FockBasis(8)), tgrid)[-1]
        gwave = evaluate_on_grid(wave, grid64)
        quad = swe_expectation(gwave, SemiclassicalObservable.abs_square())
        samples = sample_field(gwave, 100000, seed=7)
        values = np.array([abs(s.a) ** 2 for s in samples])
        stderr = values.std(ddof=1) / np.sqrt(len(values))
        assert abs(values.mean() - quad) <= 3.0 * stderr

    def test_seed_determinism(self, grid64):
        wave = initial_wave(EXCITED, grid64)
        first = sample_field(wave, 500, seed=3)
        second = sample_field(wave, 500, seed=3)
        assert [s.a for s in first] == [s.a for s in second]
        third = sample_field(wave, 500, seed=4)
        assert [s.a for s in first] != [s.a for s in third]

    def test_conditional_states_attached(self, grid64):
        wave = initial_wave(EXCITED, grid64)
        for sample in sample_field(wave, 50, seed=0):
            assert isinstance(sample, FieldSample)
            np.testing.assert_allclose(sample.conditional_state, EXCITED, atol=1e-12)


class TestOracleComparison:
    def test_identical_at_time_zero(self, grid64):
        space = CompositeSpace(2, FockBasis(8))
        vac = np.zeros(9, dtype=complex)
        vac[0] = 1.0
        state = product_initial_state(EXCITED, vac, space)
        wave = initial_wave(EXCITED, FockBasis(8))
        report = compare_to_oracle(wave, state, grid64)
        assert report.linf <= 1e-10
        assert report.l2 <= 1e-10

    def test_full_period_agreement(self, grid64):
        model = two_level_model(g=1.0)
        space = CompositeSpace(2, FockBasis(8))
        vac = np.zeros(9, dtype=complex)
        vac[0] = 1.0
        tgrid = TimeGrid(0.0, np.pi, np.pi / 3142, 3142)
        state = evolve_unitary(model, product_initial_state(EXCITED, vac, space),
                               tgrid).states[-1]
        wave = evolve_swe(model, initial_wave(EXCITED, FockBasis(8)), tgrid)[-1]
        report = compare_to_oracle(wave, state, grid64)
        assert report.linf <= 1e-7
        for name in ("1", "a", "a*", "|a|^2"):
            assert report.moments[name]["delta"] <= 1e-7
        payload = report.to_json_dict()
        assert set(payload) == {"linf", "l2", "moments"}
        assert payload["moments"]["|a|^2"]["swe"]["re"] == pytest.approx(
            np.sin(np.pi) ** 2 + 1.0, abs=1e-6)

    def test_atomic_marginal_matches_partial_trace(self, grid64):
        # quadrature of psi psi+ over the field plane is the reduced atomic
        # density operator of the oracle state
        from semicav.fockspace import partial_trace_field
        from semicav.unitary import density_operator

        model = two_level_model(g=1.0)
        space = CompositeSpace(2, FockBasis(8))
        vac = np.zeros(9, dtype=complex)
        vac[0] = 1.0
        tgrid = TimeGrid(0.0, 1.1, 1e-3, 1100)
        state = evolve_unitary(model, product_initial_state(EXCITED, vac, space),
                               tgrid).states[-1]
        wave = evolve_swe(model, initial_wave(EXCITED, FockBasis(8)), tgrid)[-1]
        gwave = evaluate_on_grid(wave, grid64)
        marginal = np.einsum("xyi,xyj->ij", gwave.values, gwave.values.conj()) \
            * grid64.weight
        reduced = partial_trace_field(density_operator(state), space)
        np.testing.assert_allclose(marginal, reduced, atol=1e-8)
