import numpy as np
import pytest

from modde.exceptions import ConfigurationError
from modde.problems import FUNCTIONS, function_name, make_instance


@pytest.mark.parametrize("name", FUNCTIONS)
@pytest.mark.parametrize("dim", [2, 5, 20])
def test_optimum_value(name, dim):
    p = make_instance(name, dim, 3)
    assert p.evaluate(p.x_opt) == pytest.approx(0.0, abs=1e-9)
    assert np.all(np.abs(p.x_opt) <= 5)


@pytest.mark.parametrize("name", FUNCTIONS)
def test_optimum_is_local_minimum(name, rng):
    p = make_instance(name, 5, 2)
    x = p.x_opt + 1e-3 * rng.normal(size=(200, 5))
    x = np.clip(x, -5, 5)
    assert np.all(p.evaluate(x) >= -1e-12)


def test_instances_differ_and_repeat():
    a, b = make_instance("rastrigin", 5, 1), make_instance("rastrigin", 5, 2)
    assert not np.allclose(a.x_opt, b.x_opt)
    assert np.array_equal(a.x_opt, make_instance(4 + 1, 5, 1).x_opt)


def test_shell_optimum_on_unit_sphere():
    for inst in range(1, 6):
        p = make_instance("shell", 7, inst)
        assert abs(np.linalg.norm(p.x_opt) - 1.0) < 1e-12


def test_ellipsoid_hand_value():
    p = make_instance("ellipsoid", 2, 1)
    assert p.evaluate(p.x_opt + 1.0) == pytest.approx(1.0 + 1e6)


def test_linear_slope_clamped_past_bound():
    p = make_instance("linear_slope", 4, 1)
    assert np.all(np.abs(p.x_opt) == 5)
    grid = np.linspace(0, 3, 7)
    for j in range(4):
        for step in grid:
            x = p.x_opt.copy()
            x[j] += np.sign(p.x_opt[j]) * step
            assert p.evaluate(x) == pytest.approx(0.0, abs=1e-12)


def test_batch_and_shape_errors():
    p = make_instance("sphere", 3)
    x = np.zeros((4, 3))
    assert p.evaluate(x).shape == (4,)
    with pytest.raises(ValueError):
        p.evaluate(np.zeros(4))


def test_precision():
    p = make_instance("sphere", 3)
    assert p.precision(0.0) == 0.0
    assert p.precision(1e-3) == 1e-3
    assert p.precision(-1e-15) == 0.0


def test_bad_ids():
    with pytest.raises(ConfigurationError):
        function_name("ackley")
    with pytest.raises(ConfigurationError):
        make_instance(7, 5)
    with pytest.raises(ConfigurationError):
        make_instance("sphere", 1)
