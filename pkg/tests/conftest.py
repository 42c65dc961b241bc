import numpy as np
import pytest

from adae import MatrixPencil, WeierstrassSpec, weierstrass_pencil

N2 = np.array([[0.0, 1.0], [0.0, 0.0]])


@pytest.fixture
def n2_pencil():
    """Pure nilpotent index-2 pencil (E = N2, A = I)."""
    return MatrixPencil(N2, np.eye(2))


@pytest.fixture
def diag_pencil():
    """Index-1 diagonal pencil: one ODE direction, one algebraic."""
    return MatrixPencil(np.diag([1.0, 0.0]), np.diag([-1.0, 1.0]))


@pytest.fixture
def semidiss_pencil():
    """Semi-dissipative index-2 pencil: E orthogonal projection, A skew."""
    return MatrixPencil(np.diag([1.0, 0.0]), np.array([[0.0, -1.0], [1.0, 0.0]]))


@pytest.fixture
def ode_pencil():
    """Plain ODE pencil E = I with stable diagonal A."""
    return MatrixPencil(np.eye(2), np.diag([-1.0, -2.0]))


def random_regular_pencil(rng, n):
    """Dense complex pencil; E and A generic, hence regular a.s."""
    E = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return MatrixPencil(E, A)


def random_index_pencil(seed, k, n_ode=2):
    """Weierstrass-built pencil with known Kronecker index k."""
    rng = np.random.default_rng(seed)
    eigs = tuple(-rng.uniform(0.5, 4.0, n_ode))
    blocks = (k,) if k else ()
    return weierstrass_pencil(WeierstrassSpec(eigs, blocks, seed))[0]
