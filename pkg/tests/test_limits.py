"""Approach families, limit verdicts, and the boundary behavior checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from valiron.geometry import (
    DomainError,
    LinearProjectionAtInfinity,
    SiegelPoint,
    first_coordinate_projection,
    kobayashi_distance,
    koranyi_contains,
    koranyi_region_at_infinity,
    project,
    siegel_height,
)
from valiron.limits import (
    C0_SWEEP,
    M_SWEEP,
    ApproachFamily,
    c_special_family,
    e0_limit,
    e_limit,
    estimate_limit,
    generate_sequences,
    jwc_check,
    k_limit,
    koranyi_family,
    left_inverse_ratio_check,
    probe_family,
    projection_distance,
    projection_invariance_check,
    radial_family,
    verdict_from_traces,
    zero_special_family,
)
from valiron.maps import PsiChoice, catalog, make_siegel_linear, make_valiron_example


class TestFamilies:
    def test_ladder_must_increase(self):
        with pytest.raises(DomainError):
            ApproachFamily(kind="radial", n_dim=1, ladder=(10.0, 10.0))

    def test_generation_is_deterministic(self):
        fam = c_special_family(0.5, 1.0, 2)
        a = generate_sequences(fam, count=len(fam.seeds) + 3, seed=9)
        b = generate_sequences(fam, count=len(fam.seeds) + 3, seed=9)
        assert len(a) == len(fam.seeds) + 3
        for sa, sb in zip(a, b):
            assert sa == sb

    def test_drawn_seeds_depend_on_the_seed(self):
        fam = koranyi_family(2.0, 2)
        a = generate_sequences(fam, count=len(fam.seeds) + 2, seed=0)
        b = generate_sequences(fam, count=len(fam.seeds) + 2, seed=1)
        assert a[-1] != b[-1]

    @given(m_amp=st.sampled_from(M_SWEEP), seed=st.integers(0, 2_000))
    @settings(max_examples=40, deadline=None)
    def test_koranyi_sequences_stay_in_their_region(self, m_amp, seed):
        region = koranyi_region_at_infinity(m_amp)
        fam = koranyi_family(m_amp, 2)
        for seq in generate_sequences(fam, count=len(fam.seeds) + 2, seed=seed):
            for q in seq:
                assert koranyi_contains(region, q)

    def test_c_special_sequences_respect_their_bound(self):
        c_bound = 0.5
        fam = c_special_family(c_bound, 1.0, 2)
        p1 = first_coordinate_projection(2)
        for seq in generate_sequences(fam):
            for q in seq:
                d = kobayashi_distance(q, project(p1, q))
                assert d <= c_bound + 1e-9

    def test_zero_special_distances_decay(self):
        fam = zero_special_family(5e-4, 0.0, 2)
        p1 = first_coordinate_projection(2)
        for seq in generate_sequences(fam):
            ds = [kobayashi_distance(q, project(p1, q)) for q in seq]
            assert all(b <= a + 1e-15 for a, b in zip(ds, ds[1:]))

    def test_radial_family_is_one_real_sequence(self):
        fam = radial_family(2)
        seqs = generate_sequences(fam, count=5)
        assert len(seqs) == 1
        for q in seqs[0]:
            assert q.z.imag == 0 and np.all(q.w == 0)


class TestVerdicts:
    def test_constant_traces_give_a_limit(self):
        traces = [np.full(7, 2.0 + 0j), np.full(7, 2.0 + 1e-6j)]
        v = verdict_from_traces(traces, tol=1e-3)
        assert v.exists and v.value == pytest.approx(2.0, abs=1e-5)

    def test_separated_traces_give_a_witness(self):
        traces = [np.full(7, 2.0 + 0j), np.full(7, 2.5 + 0j)]
        v = verdict_from_traces(traces, tol=1e-3)
        assert v.status == "no-limit"
        i, j, vi, vj, sep = v.witness
        assert {i, j} == {0, 1}
        assert sep == pytest.approx(0.5)

    def test_mild_spread_is_inconclusive(self):
        traces = [np.full(7, 2.0 + 0j), np.full(7, 2.003 + 0j)]
        v = verdict_from_traces(traces, tol=1e-3)
        assert v.status == "inconclusive"

    def test_estimate_limit_on_linear_map(self):
        m = make_siegel_linear(2.0, 2)

        def h(q):
            return m(q).z / q.z

        v = estimate_limit(h, koranyi_family(2.0, 2), tol=1e-6)
        assert v.exists and v.value == pytest.approx(2.0, abs=1e-9)


class TestSweeps:
    def test_linear_map_has_all_three_limits(self):
        m = make_siegel_linear(3.0, 2)

        def h(q):
            return m(q).z / q.z

        assert k_limit(h, 2).exists
        assert e_limit(h, 2).exists
        assert e0_limit(h, 2).exists

    def test_oscillating_example_separates_the_notions(self):
        """K- and E-limits fail while the E0-limit exists: the negative control."""
        m = make_valiron_example(2.0, PsiChoice("oscillating"))

        def h(q):
            return m(q).z / q.z

        vk = k_limit(h, 2, tol=1e-2)
        assert vk.status == "no-limit"
        assert vk.witness[4] > 0.1
        ve = e_limit(h, 2, tol=1e-3)
        assert ve.status == "no-limit"
        v0 = e0_limit(h, 2, tol=1e-2)
        assert v0.exists
        assert v0.value == pytest.approx(2.0, abs=1e-2)


class TestProjectionInvariance:
    def test_closed_form_matches_two_point_pipeline(self):
        rho = LinearProjectionAtInfinity(np.array([1.0 + 0j]))
        p1 = first_coordinate_projection(2)
        for k in (5.0, 50.0, 500.0, 5000.0):
            q = SiegelPoint(k, np.zeros(1))
            direct = kobayashi_distance(project(p1, q), project(rho, q))
            assert projection_distance(q, rho) == pytest.approx(direct, rel=1e-10)

    def test_pins_the_true_distance_at_small_heights(self):
        # atanh(1/sqrt(1+k)): 0.0706 at k = 200, an order above 1e-2
        rho = LinearProjectionAtInfinity(np.array([1.0 + 0j]))
        d200 = projection_distance(SiegelPoint(200.0, np.zeros(1)), rho)
        assert d200 == pytest.approx(math.atanh(1.0 / math.sqrt(201.0)), rel=1e-12)
        assert d200 == pytest.approx(0.070651, abs=1e-6)

    def test_ladder_report(self):
        rho = LinearProjectionAtInfinity(np.array([1.0 + 0j]))
        pts = [SiegelPoint(200.0 * 4.0 ** j, np.zeros(1)) for j in range(12)]
        rep = projection_invariance_check(pts, rho, tol=1e-2)
        assert rep.passed and rep.monotone
        assert rep.max_tail < 1e-2
        assert rep.distances[0] == pytest.approx(0.070651, abs=1e-6)
        assert rep.distances[-1] < 1e-3
        # the two projected shadows agree up to the vanishing gap
        assert abs(rep.c_witness_axis - rep.c_witness_projected) <= rep.max_tail + 1e-12
        assert rep.restricted_projected_t < 1e-12


class TestChecks:
    def test_jwc_passes_for_every_catalog_map(self):
        for name, m in catalog().items():
            rho = first_coordinate_projection(m.dim)
            rep = jwc_check(m, rho, tol=1e-3)
            assert rep.passed, name
            assert abs(rep.part1.value - m.multiplier) <= 1e-3
            assert abs(rep.part2.value) <= 1e-3

    def test_jwc_with_tilted_projection(self):
        m = catalog()["halfplane_affine(2,1,2)"]
        rho = LinearProjectionAtInfinity(np.array([0.3 + 0.4j]))
        rep = jwc_check(m, rho, tol=1e-3)
        assert rep.passed

    def test_left_inverse_ratio_confirmed_for_linear(self):
        m = make_siegel_linear(2.0, 2)
        ladder = tuple(10.0 ** k for k in range(1, 10))
        rep = left_inverse_ratio_check(
            m, LinearProjectionAtInfinity(np.array([0.5 + 0j])), tol=1e-3, ladder=ladder
        )
        assert rep.status == "confirmed" and rep.passed
        assert abs(rep.ratio_verdict.value - 2.0) <= 1e-3
        assert abs(rep.derivative_verdict.value) <= 1e-3

    def test_left_inverse_ratio_inconclusive_without_the_prerequisite(self):
        """w^2 psi(z) does not decay along C-special families, so the
        prerequisite E-limit genuinely fails and no verdict is forced."""
        m = make_valiron_example(2.0, PsiChoice("oscillating"))
        rep = left_inverse_ratio_check(
            m, LinearProjectionAtInfinity(np.array([0.5 + 0j])), tol=1e-3
        )
        assert rep.status == "inconclusive"
        assert not rep.prerequisite.exists
        assert rep.ratio_verdict is None

    def test_jwc_requires_siegel_side(self):
        from valiron.maps import make_ball_map_from_siegel

        ball = make_ball_map_from_siegel(make_siegel_linear(2.0, 2))
        with pytest.raises(DomainError):
            jwc_check(ball, first_coordinate_projection(2))
