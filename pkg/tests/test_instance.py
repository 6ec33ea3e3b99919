import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_spec
from l1bench.instance import (
    ProblemInstance,
    WrongGeneratorError,
    igen,
    igen2,
    load_instance,
    permute_columns,
    read_header,
    save_instance,
    subgradient_of,
    verify_optimality,
)
from l1bench.operator import (
    BlockOperator,
    OperatorSpec,
    Spectrum,
    materialize_dense,
    stage_composition,
)
from l1bench.solution import SparseSolution, kappa_AtA, osgen


def identity_spec(n=2):
    return OperatorSpec(n, n, Spectrum(n, values=np.ones(n)))


def seeded_spec(n, q=1, stages=1, theta=2 * np.pi / 3, seed=0):
    return OperatorSpec(2 * n, n, Spectrum.uniform(n, 0, 10.0**q, 0.1, seed=seed),
                        stage_composition(n, stages, theta))


# -- subgradients --------------------------------------------------------------------


def test_subgradient_signs():
    np.testing.assert_array_equal(subgradient_of(SparseSolution.from_dense([3.0, -2.0])), [1, -1])


def test_subgradient_constant_fill():
    np.testing.assert_array_equal(subgradient_of(SparseSolution.from_dense([0.0, 5.0]), 0.0),
                                  [0, 1])


def test_subgradient_uniform_fill_is_interior():
    g = subgradient_of(SparseSolution.zeros(1000), "uniform", rng=1)
    assert np.all(np.abs(g) <= 0.9)
    assert np.unique(g).size > 900


def test_subgradient_rejects_out_of_range_fill():
    with pytest.raises(ValueError):
        subgradient_of(SparseSolution.zeros(3), 1.5)


# -- igen ------------------------------------------------------------------------


def test_igen_hand_example():
    inst = igen(0.5, identity_spec(), SparseSolution.from_dense([1.0, 0.0]), zero_fill=0.0)
    np.testing.assert_allclose(inst.b, [1.5, 0.0])
    assert inst.noise_norm == pytest.approx(0.5)
    x = np.array([1.0, 0.0])
    np.testing.assert_allclose(inst.op.rmatvec(inst.op.matvec(x) - inst.b), [-0.5, 0.0])
    assert verify_optimality(inst).passed


def test_igen_zero_solution_constant_fill_gives_zero_rhs():
    inst = igen(1.0, small_spec(stages=2), SparseSolution.zeros(8), zero_fill=0.0)
    assert not np.any(inst.b)
    assert verify_optimality(inst).passed


def test_igen_rejects_wide_operator():
    wide = BlockOperator(identity_spec(4), np.ones((4, 4)))
    with pytest.raises(WrongGeneratorError, match="igen2"):
        igen(1.0, wide, SparseSolution.zeros(8))


def test_igen_desk_instance_passes_certificate():
    n = 2**10
    op = seeded_spec(n)
    inst = igen(1.0, op, osgen(n, n // 128, 10.0, rng=3), rng=4)
    assert verify_optimality(inst, 1e-8).passed


def test_perturbed_rhs_fails_certificate():
    n = 64
    inst = igen(1.0, seeded_spec(n), osgen(n, 4, 10.0, rng=0), rng=1)
    assert verify_optimality(inst).passed
    b = inst.b.copy()
    b[0] += 1.0
    bad = ProblemInstance(inst.tau, inst.op, b, inst.x_star)
    assert not verify_optimality(bad).passed


def test_trivial_certificate():
    inst = ProblemInstance(1.0, identity_spec(3), np.zeros(3), SparseSolution.zeros(3))
    rep = verify_optimality(inst)
    assert rep.passed and rep.active_residual == 0 and rep.inactive_violation == 0


@settings(max_examples=30, deadline=None)
@given(
    n=st.sampled_from([8, 16, 64, 256]),
    stages=st.integers(1, 4),
    tau=st.sampled_from([1e-2, 1.0, 1e2]),
    seed=st.integers(0, 2**31),
)
def test_igen_round_trip_property(n, stages, tau, seed):
    op = seeded_spec(n, q=1, stages=stages, theta=2 * np.pi / 10, seed=seed)
    inst = igen(tau, op, osgen(n, max(1, n // 8), 10.0, rng=seed), rng=seed + 1)
    tol = 1e-8 * np.sqrt(kappa_AtA(op.spectrum))
    assert verify_optimality(inst, tol).passed


def test_noise_scales_linearly_in_tau():
    n = 32
    op = seeded_spec(n)
    xs = osgen(n, 4, 10.0, rng=5)
    e1 = igen(1.0, op, xs, rng=6).noise_norm
    e2 = igen(2.0, op, xs, rng=6).noise_norm
    assert e2 == pytest.approx(2 * e1, rel=1e-12)


# -- igen2 --------------------------------------------------------------------------


def test_igen2_hand_example():
    B = OperatorSpec(1, 1, Spectrum(1, values=[2.0]))
    A, inst = igen2(1.0, B, [[1.0]], SparseSolution.from_dense([3.0, 0.0]), xi=0.5)
    np.testing.assert_allclose(A.N, [[1.0]])
    np.testing.assert_allclose(inst.b, [6.5])
    assert inst.noise_norm == pytest.approx(0.5)
    r = A.rmatvec(A.matvec([3.0, 0.0]) - inst.b)
    np.testing.assert_allclose(r, [-1.0, -0.5])
    assert verify_optimality(inst).passed


def test_igen2_column_products_bounded_by_tau():
    m, k = 32, 40
    B = OperatorSpec(m, m, Spectrum.uniform(m, 0, 10, 0.1, seed=0), stage_composition(m, 2, 0.3))
    x = np.zeros(m + k)
    x[:4] = [1.0, -2.0, 3.0, 0.5]
    A, inst = igen2(0.7, B, k, SparseSolution.from_dense(x), rng=2)
    e = inst.b - A.matvec(x)
    prods = np.abs(A.N.T @ e)
    assert np.all(prods <= 0.7 * (1 + 1e-12))
    assert np.all(prods >= 0.7 * 1e-3 * (1 - 1e-12))


def test_igen2_desk_instance():
    m = 2**8
    B = OperatorSpec(m, m, Spectrum.uniform(m, 0, 10, 0.1, seed=1))
    xs = SparseSolution(2 * m, np.arange(0, m, 16), np.linspace(1, 4, m // 16))
    A, inst = igen2(1.0, B, m, xs, rng=3)
    assert verify_optimality(inst, 1e-8).passed
    dense = np.hstack([materialize_dense(B), A.N])
    assert np.linalg.svd(dense[:, xs.support], compute_uv=False).min() > 0


def test_igen2_rejects_support_outside_b_block():
    B = OperatorSpec(2, 2, Spectrum(2, values=[1.0, 1.0]))
    with pytest.raises(ValueError, match="first m"):
        igen2(1.0, B, 2, SparseSolution.from_dense([0, 0, 1.0, 0]))


def test_igen2_rejects_square_problem():
    B = OperatorSpec(2, 2, Spectrum(2, values=[1.0, 1.0]))
    with pytest.raises(WrongGeneratorError):
        igen2(1.0, B, np.zeros((2, 0)), SparseSolution.zeros(2))


def test_igen2_resamples_orthogonal_column():
    B = OperatorSpec(2, 2, Spectrum(2, values=[1.0, 1.0]))
    A, inst = igen2(1.0, B, [[0.0], [1.0]], SparseSolution.from_dense([1.0, 0, 0]),
                    zero_fill=0.0, xi=0.5, rng=0)
    assert verify_optimality(inst).passed
    assert abs(A.N[:, 0] @ (inst.b - A.matvec([1.0, 0, 0]))) == pytest.approx(0.5)


# -- permutation and files ------------------------------------------------------------


def test_permuted_instance_keeps_certificate():
    n = 32
    inst = igen(1.0, seeded_spec(n), osgen(n, 4, 10.0, rng=0), rng=1)
    perm = permute_columns(inst, rng=7)
    assert verify_optimality(perm).passed


def test_file_round_trip(tmp_path):
    n = 64
    inst = igen(0.5, seeded_spec(n, stages=2), osgen(n, 4, 10.0, rng=0), rng=1)
    inst.meta["seeds"] = {"solution": 0}
    path = tmp_path / "a.l1i"
    save_instance(path, inst)
    header = read_header(path)
    assert header["n"] == n and header["m"] == 2 * n and header["tau"] == 0.5
    assert header["seeds"] == {"solution": 0}
    again = load_instance(path)
    np.testing.assert_array_equal(again.b, inst.b)
    np.testing.assert_array_equal(again.x_star.to_dense(), inst.x_star.to_dense())
    x = np.random.default_rng(0).standard_normal(n)
    np.testing.assert_array_equal(again.op.matvec(x), inst.op.matvec(x))
    assert again.meta["conditioning"]["kappa_AtA"] == pytest.approx(kappa_AtA(inst.op.spectrum))


def test_file_round_trip_block_operator(tmp_path):
    B = OperatorSpec(4, 4, Spectrum(4, values=[1.0, 2, 3, 4]))
    A, inst = igen2(1.0, B, 3, SparseSolution.from_dense([1.0, 0, 0, 0, 0, 0, 0]), rng=0)
    save_instance(tmp_path / "b.l1i", inst)
    again = load_instance(tmp_path / "b.l1i")
    np.testing.assert_array_equal(again.op.N, A.N)
    assert verify_optimality(again).passed


def test_load_rejects_foreign_file(tmp_path):
    p = tmp_path / "x.l1i"
    p.write_bytes(b"hello\n{}\n")
    with pytest.raises(ValueError):
        load_instance(p)
