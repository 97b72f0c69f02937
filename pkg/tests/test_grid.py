import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dstream.grid import (
    DIRICHLET,
    INTERIOR,
    OUTFLOW,
    ZERO_GRADIENT,
    BoundaryCondition,
    EdgeCondition,
    GridError,
    ScalarField,
    VelocityField,
    apply_boundary,
    make_grid,
    read_field_csv,
    write_field_csv,
)


def test_profile_grid_spacing():
    g = make_grid(30, 30, [[0, 1], [0, 1]])
    assert g.delta == 1 / 29
    assert g.shape == (30, 30)
    assert g.x[-1] == pytest.approx(1.0)


def test_minimal_grid():
    assert make_grid(2, 2, [[0, 1], [0, 1]]).delta == 1.0


def test_non_square_spacing_rejected():
    with pytest.raises(GridError):
        make_grid(40, 20, [[-1, 1], [0, 1]])


def test_smith_hutton_cells_give_square_spacing():
    g = make_grid(41, 21, [[-1, 1], [0, 1]])
    assert g.dx == pytest.approx(g.dy) == pytest.approx(0.05)


@pytest.mark.parametrize("nx, ny", [(1, 5), (5, 1), (0, 0)])
def test_too_few_nodes(nx, ny):
    with pytest.raises(GridError):
        make_grid(nx, ny, [[0, 1], [0, 1]])


def test_bounds_must_be_ordered():
    with pytest.raises(GridError):
        make_grid(3, 3, [[1, 0], [0, 1]])


@given(st.integers(2, 40), st.data())
def test_index_round_trip(n, data):
    g = make_grid(n, n, [[0, 1], [0, 1]])
    i = data.draw(st.integers(0, n - 1))
    j = data.draw(st.integers(0, n - 1))
    assert g.index_of(*g.coordinate_of(i, j)) == (i, j)


def test_index_outside():
    g = make_grid(3, 3, [[0, 1], [0, 1]])
    with pytest.raises(GridError):
        g.index_of(2.0, 0.0)


def test_field_validation():
    g = make_grid(3, 3, [[0, 1], [0, 1]])
    with pytest.raises(GridError):
        ScalarField(g, np.zeros((3, 4)))
    with pytest.raises(GridError):
        ScalarField(g, np.full((3, 3), np.nan))
    with pytest.raises(GridError):
        VelocityField(g, np.zeros((3, 3)), np.full((3, 3), np.inf))


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 1), st.floats(0, 1))
def test_bilinear_sampling_is_exact_on_planes(a, b, c, x, y):
    g = make_grid(6, 6, [[0, 1], [0, 1]])
    vel = VelocityField.from_function(g, lambda X, Y: (a + b * X + c * Y, b * X - c * Y))
    u, v = vel.sample(x, y)
    assert u == pytest.approx(a + b * x + c * y, abs=1e-12)
    assert v == pytest.approx(b * x - c * y, abs=1e-12)


def _unit_square_bc(n=5):
    g = make_grid(n, n, [[0, 1], [0, 1]])
    bc = BoundaryCondition(g, [
        EdgeCondition("left", "dirichlet", 1.0),
        EdgeCondition("bottom", "dirichlet", lambda x, y: 2 + x),
        EdgeCondition("top", "outflow"),
        EdgeCondition("right", "zero-gradient"),
    ])
    return g, bc


def test_boundary_tagging():
    g, bc = _unit_square_bc()
    assert np.all(bc.kind[:, 0] == DIRICHLET)
    assert np.all(bc.kind[1:-1, -1] == ZERO_GRADIENT)
    assert np.all(bc.kind[-1, 1:] == OUTFLOW)
    assert np.all(bc.kind[1:-1, 1:-1] == INTERIOR)
    # corners take the first edge listed
    assert bc.values[0, 0] == 1.0
    assert bc.values[0, -1] == pytest.approx(3.0)
    assert bc.source[2, -1] == 2 * g.nx + g.nx - 2
    assert bc.data_bounds() == (1.0, pytest.approx(3.0))


def test_every_perimeter_node_has_one_kind():
    g, bc = _unit_square_bc()
    perimeter = np.ones(g.shape, dtype=bool)
    perimeter[1:-1, 1:-1] = False
    assert np.all(bc.kind[perimeter] != INTERIOR)


def test_edge_value_off_dirichlet_is_nan():
    g, bc = _unit_square_bc()
    assert bc.edge_value(0.0, 0.5) == 1.0
    assert bc.edge_value(0.5, 0.0) == pytest.approx(2.5)
    assert math.isnan(bc.edge_value(1.0, 0.5))
    assert math.isnan(bc.edge_value(0.5, 1.0))


def test_zero_gradient_needs_interior_neighbour():
    g = make_grid(2, 2, [[0, 1], [0, 1]])
    with pytest.raises(GridError):
        BoundaryCondition(g, [EdgeCondition("bottom", "zero-gradient")])


def test_unknown_edge_kinds():
    with pytest.raises(GridError):
        EdgeCondition("front", "dirichlet", 1.0)
    with pytest.raises(GridError):
        EdgeCondition("left", "neumann", 1.0)
    with pytest.raises(GridError):
        EdgeCondition("left", "dirichlet")


def test_apply_boundary():
    g, bc = _unit_square_bc()
    f = ScalarField(g, np.full(g.shape, 0.37))
    out = apply_boundary(f, bc)
    assert np.all(out.values[:, 0] == 1.0)
    assert np.all(out.values[1:-1, -1] == 0.37)
    assert np.array_equal(apply_boundary(out, bc).values, out.values)
    assert f.values[0, 0] == 0.37


def test_wall_value_is_exactly_zero():
    assert 1 - math.tanh(1000.0) == 0.0


@given(values=arrays(float, (4, 6), elements=st.floats(-1e6, 1e6, allow_subnormal=False)))
def test_csv_round_trip_is_bit_exact(tmp_path_factory, values):
    g = make_grid(6, 4, [[-1, 1], [0, 1.2]])
    path = tmp_path_factory.mktemp("csv") / "field.csv"
    write_field_csv(ScalarField(g, values), path)
    back = read_field_csv(path)
    assert back.grid.shape == g.shape
    assert np.array_equal(back.values, values)


def test_csv_layout(tmp_path):
    g = make_grid(3, 2, [[0, 1], [0, 0.5]])
    write_field_csv(ScalarField(g, np.arange(6.0).reshape(2, 3)), tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "x,y,phi"
    assert lines[1:4] == ["0,0,0", "0.5,0,1", "1,0,2"]
    assert lines[4] == "0,0.5,3"
