import numpy as np
import pytest

from dynsample import Subspace, SystemInstance, build_resolvents, random_instance

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def scalar_instance(a=0.5, N=2, g=1.0):
    return SystemInstance(A=[[a]], W=Subspace.full(1), G=[[g]], N=N)


def rotation_instance():
    # A = [[0, .5], [-.5, 0]], W = span{e1}, G = {(0.5, 1)}: fails at s=0, passes at s=1
    A = np.array([[0, 0.5], [-0.5, 0]])
    W = Subspace(np.array([[1.0], [0.0]]))
    return SystemInstance(A=A, W=W, G=[[0.5, 1.0]], N=2)


def orthogonal_failing_instance(N=3):
    # W_s = span{e1} for every s and G = {e2}
    A = np.diag([0.3, 0.6])
    W = Subspace(np.array([[1.0], [0.0]]))
    return SystemInstance(A=A, W=W, G=[[0.0, 1.0]], N=N)


def failing_at(inst, s, v=None, leak=0.0, seed=0):
    """Copy of ``inst`` whose sampling vectors are all orthogonal to T_s v for some v in W.

    ``leak`` adds a small component back along T_s v to the first vector,
    giving a near-failing instance.
    """
    rng = np.random.default_rng(seed)
    if v is None:
        v = inst.W.basis @ (rng.standard_normal(inst.W.dim) + 1j * rng.standard_normal(inst.W.dim))
    u = build_resolvents(inst.A, inst.N)[s] @ v
    u = u / np.linalg.norm(u)
    G = inst.G - np.outer(inst.G @ u.conj(), u)
    G[0] += leak * u
    return SystemInstance(A=inst.A, W=inst.W, G=G, N=inst.N, seed=inst.seed)


def engineered_failing(seed):
    """Random failing instance: either too few vectors for W, or orthogonality at one frequency."""
    rng = np.random.default_rng(10_000 + seed)
    d = int(rng.integers(2, 7))
    N = int(rng.integers(1, 5))
    m = int(rng.integers(1, d + 1))
    if seed % 2 and m >= 2:
        return random_instance(d, N, int(rng.integers(1, m)), m, 0.5, seed)
    inst = random_instance(d, N, d + 1, m, 0.5, seed)
    return failing_at(inst, int(rng.integers(0, N)), seed=seed)


def sweep_params(i, base=0):
    rng = np.random.default_rng(base + i)
    d = int(rng.integers(2, 9))
    N = int(rng.integers(1, 6))
    m = int(rng.integers(1, d + 1))
    return d, N, m


def random_unitary(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

