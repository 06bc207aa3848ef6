import pytest

from plantflow import (
    Linear,
    PlantChain,
    SolutionCase,
    SolverConfig,
    Weibull,
    capacity,
    detect_bottleneck,
    flow,
    is_feasible,
    multi_segment_solve,
    oracle_grid,
    solve,
    two_segment_solve,
)
from plantflow.chain import OptimalSolution, max_relative_deviation
from plantflow.errors import (
    ConfigError,
    CurveValidityError,
    NoPositiveFlow,
    NoStationarySegment,
)

RUBRUM_STEM = Weibull(25.29, 4.22, 4.67)
RUBRUM_LEAF = Weibull(29.2, 1.76, 10.24)
SYNTHETIC = PlantChain.from_curves(0.0, [RUBRUM_STEM, Linear(1000.0, 100.0)], ["stem", "leaf"])


def test_chain_structural_invariants():
    with pytest.raises(ConfigError, match="n >= 1"):
        PlantChain(0.0, ())
    with pytest.raises(ConfigError):
        PlantChain.from_curves(-0.1, [RUBRUM_STEM])


def test_chain_scaling_and_soil_override(a_rubrum):
    doubled = a_rubrum.scaled(2.0)
    assert doubled.curves[0].k_max == pytest.approx(50.58)
    assert a_rubrum.with_soil_potential(0.3).soil_potential == 0.3
    assert a_rubrum.soil_potential == 0.0


def test_two_segment_a_rubrum(a_rubrum):
    s = two_segment_solve(a_rubrum)
    assert s.potentials[0] == pytest.approx(0.73, abs=0.005)
    assert s.potentials[1] == pytest.approx(1.50, abs=0.005)
    assert s.flow == pytest.approx(18.48, abs=0.005)
    assert s.isolated_first_capacity == pytest.approx(61.94, abs=0.005)
    assert s.case is SolutionCase.BOTTLENECK
    assert s.bottleneck_index == 2


def test_two_segment_p_virginiana(species_chains):
    s = two_segment_solve(species_chains["p_virginiana"])
    assert s.potentials == pytest.approx((1.06, 1.35), abs=0.005)
    assert s.flow == pytest.approx(1.13, abs=0.005)
    assert s.case is SolutionCase.BOTTLENECK


def test_two_segment_non_bottleneck_matches_oracle():
    s = two_segment_solve(SYNTHETIC)
    stem_cap = capacity(RUBRUM_STEM, 0.0)
    assert s.case is SolutionCase.NON_BOTTLENECK
    assert s.bottleneck_index == 1
    assert s.potentials[0] == pytest.approx(stem_cap.argmax_potential, rel=1e-12)
    assert s.flow == pytest.approx(61.94, abs=0.005)
    # x2 is the smallest root of the leaf flow
    leaf = SYNTHETIC.curves[1]
    assert flow(leaf, s.potentials[0], s.potentials[1]) == pytest.approx(s.flow, rel=1e-12)
    assert s.potentials[1] < s.capacities[1].argmax_potential
    o = oracle_grid(SYNTHETIC)
    assert o.case is SolutionCase.NON_BOTTLENECK
    assert o.flow == pytest.approx(s.flow, rel=2 / 1000)


def test_two_segment_requires_two_segments():
    with pytest.raises(ConfigError):
        two_segment_solve(PlantChain.from_curves(0.0, [RUBRUM_STEM]))


def test_solvers_reject_invalid_curve():
    chain = PlantChain.from_curves(0.0, [RUBRUM_STEM, Weibull(1.0, 1.0, 0.5)])
    with pytest.raises(CurveValidityError):
        two_segment_solve(chain)
    with pytest.raises(CurveValidityError):
        multi_segment_solve(chain)


def test_solvers_reject_zero_conductance_at_soil():
    chain = PlantChain.from_curves(1.64, [RUBRUM_STEM, Linear(0.4, 1.64)])
    with pytest.raises(NoPositiveFlow):
        two_segment_solve(chain)
    with pytest.raises(NoPositiveFlow):
        multi_segment_solve(chain)


def test_dead_leaf_at_stem_peak_handled(species_chains):
    # the sunflower leaf is already fully embolised at the stem's isolated optimum
    chain = species_chains["h_annuus"]
    assert chain.curves[1].value(capacity(chain.curves[0], 0.0).argmax_potential) == 0.0
    a = two_segment_solve(chain)
    b = multi_segment_solve(chain)
    assert max_relative_deviation(a, b) < 1e-6


def test_is_feasible_zero_flow(a_rubrum):
    res = is_feasible(a_rubrum, 0.0)
    assert res.feasible
    assert res.potentials == (0.0, 0.0)


def test_is_feasible_examples(a_rubrum):
    ok = is_feasible(a_rubrum, 18.0)
    assert ok.feasible and ok.failed_segment is None
    assert len(ok.potentials) == 2
    bad = is_feasible(a_rubrum, 19.5)
    assert not bad.feasible
    assert bad.failed_segment == 2
    assert len(bad.potentials) == 1


def test_multi_single_segment_reduces_to_capacity():
    s = multi_segment_solve(PlantChain.from_curves(0.0, [RUBRUM_STEM]))
    assert s.flow == pytest.approx(61.94, abs=0.005)
    assert s.potentials[0] == pytest.approx(3.03, abs=0.005)
    assert s.bottleneck_index == 1
    assert s.case is SolutionCase.NON_BOTTLENECK


def test_multi_l_tulipifera_matches_two_segment(species_chains):
    chain = species_chains["l_tulipifera"]
    m = multi_segment_solve(chain)
    t = two_segment_solve(chain)
    assert m.potentials == pytest.approx((0.65, 1.12), abs=0.005)
    assert m.flow == pytest.approx(2.78, abs=0.005)
    assert m.flow == pytest.approx(t.flow, rel=1e-6)
    assert m.potentials == pytest.approx(t.potentials, abs=1e-4)


def test_three_segment_chain_matches_oracle():
    chain = PlantChain.from_curves(0.0, [RUBRUM_STEM, RUBRUM_STEM, RUBRUM_LEAF])
    m = multi_segment_solve(chain)
    o = oracle_grid(chain)
    assert m.flow == pytest.approx(o.flow, rel=1e-3)
    assert m.potentials == pytest.approx(o.potentials, rel=1e-3)
    assert m.bottleneck_index == o.bottleneck_index == 3
    for f in m.segment_flows(chain):
        assert f == pytest.approx(m.flow, rel=1e-8)


def test_four_segment_chain_properties():
    chain = PlantChain.from_curves(
        0.1, [Weibull(5.0, 3.0, 3.0), Weibull(8.0, 2.5, 4.0), Weibull(3.0, 4.0, 2.0),
              Weibull(6.0, 1.8, 6.0)]
    )
    m = multi_segment_solve(chain)
    o = oracle_grid(chain, SolverConfig(grid_points=300))
    assert m.flow == pytest.approx(o.flow, rel=2 / 300)
    assert list(m.potentials) == sorted(m.potentials)


def test_dispatch(a_rubrum):
    assert solve(a_rubrum, method="algebraic").flow == pytest.approx(
        solve(a_rubrum, method="bisection").flow, rel=1e-9
    )
    with pytest.raises(ValueError):
        solve(a_rubrum, method="newton")


def test_detect_bottleneck_examples(a_rubrum):
    s = two_segment_solve(a_rubrum)
    assert detect_bottleneck(s, a_rubrum) == (SolutionCase.BOTTLENECK, 2)
    assert detect_bottleneck(two_segment_solve(SYNTHETIC), SYNTHETIC) == (
        SolutionCase.NON_BOTTLENECK,
        1,
    )
    single = PlantChain.from_curves(0.0, [RUBRUM_LEAF])
    assert detect_bottleneck(multi_segment_solve(single), single) == (
        SolutionCase.NON_BOTTLENECK,
        1,
    )


def test_detect_bottleneck_rejects_non_stationary(a_rubrum):
    s = two_segment_solve(a_rubrum)
    fake = OptimalSolution(s.potentials, 0.5 * s.flow, s.case, 2, s.capacities, s.isolated_first_capacity)
    with pytest.raises(NoStationarySegment):
        detect_bottleneck(fake, a_rubrum)
