import numpy as np
import pytest
from hypothesis import given, strategies as st

from ridgeapprox.expr import parse
from ridgeapprox.geometry import DependentDirectionsError, DirectionBasis

WORKED_DIRECTIONS = [(1, 1, 1, -1), (1, 1, -1, 1), (1, -1, 1, 1)]
WORKED_COMPLETION = [(-1, 1, 1, 1)]


@pytest.fixture
def worked_basis():
    return DirectionBasis.build(WORKED_DIRECTIONS, WORKED_COMPLETION)


class TestBuild:
    def test_worked_example_determinant(self, worked_basis):
        assert worked_basis.det == pytest.approx(-16.0, rel=1e-12)
        assert worked_basis.ridge_count == 3
        assert worked_basis.dim == 4

    def test_identity_directions(self):
        basis = DirectionBasis.build(np.eye(3))
        assert np.array_equal(basis.matrix, np.eye(3))
        assert basis.det == pytest.approx(1.0, rel=1e-14)

    def test_dependent_directions_rejected(self):
        with pytest.raises(DependentDirectionsError, match="direction 2"):
            DirectionBasis.build([(1, 0, 0), (2, 0, 0)])

    def test_zero_direction_rejected(self):
        with pytest.raises(ValueError, match="zero vector"):
            DirectionBasis.build([(0, 0, 0)])

    def test_bad_completion_rejected(self):
        with pytest.raises(DependentDirectionsError, match="completion row 1"):
            DirectionBasis.build([(1, 0), ], [(2, 0)])

    def test_completion_row_count_checked(self):
        with pytest.raises(ValueError, match="completion"):
            DirectionBasis.build([(1, 0, 0)], [(0, 1, 0)])

    def test_inverse_consistency(self, worked_basis):
        product = worked_basis.matrix @ worked_basis.inverse_matrix
        assert np.max(np.abs(product - np.eye(4))) < 1e-12

    def test_auto_completion_is_deterministic(self):
        first = DirectionBasis.build(WORKED_DIRECTIONS)
        second = DirectionBasis.build(WORKED_DIRECTIONS)
        assert np.array_equal(first.matrix, second.matrix)
        assert first.det == second.det

    def test_auto_completion_uses_first_standard_vector_that_extends(self):
        basis = DirectionBasis.build(WORKED_DIRECTIONS)
        assert np.array_equal(basis.completion, [[1.0, 0.0, 0.0, 0.0]])
        assert abs(basis.det) > 0

    def test_matrices_are_read_only(self, worked_basis):
        with pytest.raises(ValueError):
            worked_basis.matrix[0, 0] = 5.0


class TestTransforms:
    def test_forward_worked_example(self, worked_basis):
        y = worked_basis.forward([0.25, 0.25, 0.25, 0.25])
        assert y == pytest.approx([0.5, 0.5, 0.5, 0.5], abs=1e-15)

    def test_forward_identity(self):
        basis = DirectionBasis.build(np.eye(4))
        x = np.array([0.3, -1.2, 4.0, 0.0])
        assert np.array_equal(basis.forward(x), x)

    def test_forward_zero(self, worked_basis):
        assert np.array_equal(worked_basis.forward(np.zeros(4)), np.zeros(4))

    def test_inverse_matches_displayed_formulas(self, worked_basis):
        expected = 0.25 * np.array(
            [[1, 1, 1, -1], [1, 1, -1, 1], [1, -1, 1, 1], [-1, 1, 1, 1]], float
        )
        assert np.max(np.abs(worked_basis.inverse_matrix - expected)) < 1e-14

    def test_inverse_identity(self):
        basis = DirectionBasis.build(np.eye(3))
        y = np.array([1.0, 2.0, 3.0])
        assert np.array_equal(basis.inverse(y), y)

    def test_round_trip_on_random_points(self, worked_basis):
        rng = np.random.default_rng(7)
        points = rng.uniform(-2, 2, size=(100, 4))
        worst = 0.0
        for x in points:
            back = worked_basis.inverse(worked_basis.forward(x))
            worst = max(worst, float(np.max(np.abs(back - x))))
        assert worst < 1e-12

    @given(st.integers(0, 2**32 - 1))
    def test_round_trip_property(self, seed):
        rng = np.random.default_rng(seed)
        basis = DirectionBasis.build(WORKED_DIRECTIONS, WORKED_COMPLETION)
        x = rng.uniform(-5, 5, size=4)
        assert np.max(np.abs(basis.inverse(basis.forward(x)) - x)) < 1e-12


class TestPullback:
    def test_quartic_pullback_is_coordinate_product(self, worked_basis):
        from tests.test_expr import QUARTIC

        evaluator = worked_basis.pullback(parse(QUARTIC))
        rng = np.random.default_rng(11)
        for _ in range(20):
            y = rng.uniform(0, 1, size=4)
            assert evaluator(y) == pytest.approx(float(np.prod(y)), abs=1e-12)

    def test_constant_pullback(self, worked_basis):
        evaluator = worked_basis.pullback(parse("3.5"))
        assert evaluator([1.0, 2.0, 3.0, 4.0]) == 3.5

    def test_identity_basis_pullback(self):
        basis = DirectionBasis.build(np.eye(2))
        evaluator = basis.pullback(parse("x1"))
        assert evaluator([0.7, -0.3]) == pytest.approx(0.7)

    def test_rejects_foreign_variables(self, worked_basis):
        with pytest.raises(ValueError, match="x5"):
            worked_basis.pullback(parse("x5"))


class TestChangeOfVariables:
    """Integral and norm scaling between the original and transformed sides."""

    def _two_route_integrals(self, basis, order, source):
        # route 1: pull back, sample on the y-grid, library contraction
        from ridgeapprox.domain import RSetDomain
        from ridgeapprox.expr import evaluate

        n = basis.dim
        dom = RSetDomain.build([(0, 1)] * basis.ridge_count, [(0, 1)] * (n - basis.ridge_count), order)
        tree = parse(source)
        y_integral = dom.sample(basis.pullback(tree)).integrate()

        # route 2: map the tensor grid into x-space and sum with
        # test-local weights, evaluating the expression directly in x
        grid = dom.grid()
        tensor_weights = np.ones(1)
        for w in dom.weights:
            tensor_weights = np.multiply.outer(tensor_weights, w)
        tensor_weights = tensor_weights.reshape(-1)
        names = [f"x{i + 1}" for i in range(n)]
        x_points = grid @ basis.inverse_matrix.T
        x_values = np.array([evaluate(tree, dict(zip(names, x))) for x in x_points])
        x_integral = float(tensor_weights @ x_values) / abs(basis.det)
        return y_integral, x_integral

    def test_integral_scaling(self, worked_basis):
        y_integral, x_integral = self._two_route_integrals(
            worked_basis, 5, "x1^2 + 2*x2*x3 - x4"
        )
        assert y_integral == pytest.approx(abs(worked_basis.det) * x_integral, rel=1e-12)

    def test_norm_scaling(self, worked_basis):
        y_sq, x_sq = self._two_route_integrals(
            worked_basis, 6, "(x1 + x2*x3)^2"
        )
        assert np.sqrt(y_sq) == pytest.approx(
            np.sqrt(abs(worked_basis.det)) * np.sqrt(x_sq), rel=1e-12
        )

    def test_integral_scaling_against_symbolic(self):
        sympy = pytest.importorskip("sympy")
        from ridgeapprox.domain import RSetDomain

        basis = DirectionBasis.build([(1, 1), (1, -1)])
        dom = RSetDomain.build([(0, 1), (0, 1)], (), order=6)
        tree = parse("x1^2*x2 + x1")
        quadrature = dom.sample(basis.pullback(tree)).integrate() / abs(basis.det)

        y1, y2 = sympy.symbols("y1 y2")
        x1 = (y1 + y2) / 2
        x2 = (y1 - y2) / 2
        integrand = (x1**2 * x2 + x1) / abs(basis.det)
        exact = float(sympy.integrate(integrand, (y1, 0, 1), (y2, 0, 1)))
        assert quadrature == pytest.approx(exact, rel=1e-12)
