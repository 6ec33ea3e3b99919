import numpy as np
import pytest

from l1bench.operator import OperatorSpec, Permutation, Spectrum, stage_composition


def small_spec(n=8, m=16, stages=1, theta=2 * np.pi / 10, left=0, seed=0, perms=False):
    """A generic small operator with distinct singular values."""
    rng = np.random.default_rng(seed)
    sigma = np.sort(rng.uniform(0.5, 3.0, size=n))[::-1]
    kw = {}
    if perms:
        kw = {"p1": Permutation(m, seed=seed + 11), "p2": Permutation(m, seed=seed + 12)}
    return OperatorSpec(
        m,
        n,
        Spectrum(n, values=sigma),
        right_stages=stage_composition(n, stages, theta),
        left_stages=stage_composition(m, left, theta),
        **kw,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
