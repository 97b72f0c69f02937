import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dstream.benchmarks import (
    PROFILE_KINDS,
    SmithHuttonParams,
    error_metrics,
    exact_field,
    extract_profile,
    make_problem,
    make_smith_hutton,
    outlet_exact,
    smith_hutton_velocity,
    trace_to_inlet,
)
from dstream.grid import DIRICHLET, ScalarField


def _ray_trace_oracle(problem, x, y):
    """Follow -V from (x, y) to the inflow edge and read the boundary data there."""
    u, v = problem.params["u"], problem.params["v"]
    if x / u <= y / v:
        return float(problem.boundary.edge_value(0.0, y - x * v / u))
    return float(problem.boundary.edge_value(x - y * u / v, 0.0))


@pytest.mark.parametrize("kind", PROFILE_KINDS)
def test_profile_oracle_matches_ray_tracing(kind):
    p = make_problem(kind)
    ex = exact_field(p)
    X, Y = p.grid.meshgrid()
    rng = np.random.default_rng(1)
    for j, i in rng.integers(0, 30, size=(200, 2)):
        assert _ray_trace_oracle(p, X[j, i], Y[j, i]) == pytest.approx(ex.values[j, i], abs=1e-12)


@pytest.mark.parametrize("name", [*PROFILE_KINDS, "smith-hutton"])
def test_oracle_agrees_with_dirichlet_data(name):
    p = make_problem(name)
    ex = exact_field(p)
    d = p.boundary.kind == DIRICHLET
    assert np.allclose(ex.values[d], p.boundary.values[d], atol=1e-12)


def test_step_field_is_binary():
    assert set(np.unique(exact_field(make_problem("step")).values)) == {0.0, 1.0}


@given(st.floats(-0.8, 1), st.floats(0, 1), st.floats(0, 1))
def test_sine_constant_along_characteristics(s, y1, y2):
    p = make_problem("sine")
    assert p.exact(s + 0.8 * y1, y1) == pytest.approx(p.exact(s + 0.8 * y2, y2), abs=1e-9)


def test_profile_problem_rejects_non_square():
    with pytest.raises(ValueError):
        make_problem("step", 30, 20)


def test_unknown_problem():
    with pytest.raises(KeyError):
        make_problem("lid-driven-cavity")


def test_profile_crosses_the_extraction_line():
    for kind in PROFILE_KINDS:
        p = make_problem(kind)
        x, _, exact, row = extract_profile(p, exact_field(p))
        assert row == 23
        assert exact.max() > 0.5 and exact.min() == 0.0


# --------------------------------------------------------- smith-hutton

def test_smith_hutton_geometry():
    p = make_problem("smith-hutton")
    assert p.grid.shape == (21, 41)
    assert p.grid.delta == pytest.approx(0.05)
    with pytest.raises(ValueError):
        make_smith_hutton(40, 40)


def test_smith_hutton_inlet_and_walls():
    p = make_problem("smith-hutton")
    assert p.inlet(-0.5) == 1.0
    assert p.boundary.values[-1, 5] == 0.0
    assert p.boundary.values[3, 0] == 0.0
    assert outlet_exact(0.5, 1000) == 1.0


def test_velocity_sample():
    assert smith_hutton_velocity(0.0, 0.5) == (1.0, 0.0)


def test_only_pure_advection():
    with pytest.raises(ValueError):
        SmithHuttonParams(alpha=10, gamma=0.1)


def test_streamfunction_and_rk4_oracles_agree_on_nodes():
    a = exact_field(make_smith_hutton(20, 10, exact_method="rk4"))
    b = exact_field(make_smith_hutton(20, 10, exact_method="streamfunction"))
    assert np.max(np.abs(a.values - b.values)) < 1e-9


@given(st.floats(0.02, 0.98))
@settings(max_examples=25, deadline=None)
def test_outlet_foot_is_the_mirror_point(x):
    # start just above the outlet; the streamline lands at -x on the inlet
    foot = trace_to_inlet(x, 1e-9)
    assert foot == pytest.approx(-x, abs=1e-6)


def test_unknown_exact_method():
    with pytest.raises(ValueError):
        make_smith_hutton(exact_method="euler")


def test_outlet_profile_extraction():
    p = make_problem("smith-hutton")
    x, phi, exact, row = extract_profile(p, exact_field(p))
    assert row == 0
    assert x[0] == pytest.approx(0.0) and x[-1] == pytest.approx(1.0)
    assert len(x) == 21


# --------------------------------------------------------------- metrics

def test_metrics_of_the_exact_field():
    p = make_problem("sine")
    ex = exact_field(p)
    m = error_metrics(ex, ex)
    assert (m.max_abs_diff, m.overshoot, m.undershoot) == (0.0, 0.0, 0.0)
    # interior nodes sample the sine peak more closely than the edge nodes do
    assert error_metrics(ex, ex, p.boundary.data_bounds()).overshoot > 0


def test_metrics_report_excursions():
    p = make_problem("step")
    ex = exact_field(p)
    vals = ex.values.copy()
    vals[10, 10] = 1.25
    vals[20, 20] = -0.5
    m = error_metrics(ScalarField(p.grid, vals), ex, (0.0, 1.0))
    assert m.overshoot == 0.25
    assert m.undershoot == 0.5
    assert m.max_abs_diff == max(abs(1.25 - ex.values[10, 10]), abs(-0.5 - ex.values[20, 20]))
