"""Named relation matrices and random generators used throughout the tests and scripts."""
import numpy as np
from scipy.stats import unitary_group

from .relations import RelationMatrix


def identity(n=2, m=2):
    return RelationMatrix(n, m, np.eye(n * m))


def diagonal(n, m, entries):
    return RelationMatrix(n, m, np.diag(np.asarray(entries, dtype=complex)))


# the three d = 2 diagonal examples for n = m = 2
U1 = (1, -1, -1, 1)
U2 = (1, -1, 1, -1)
U3 = (1, 1, -1, -1)


def u1():
    return diagonal(2, 2, U1)


def u2():
    return diagonal(2, 2, U2)


def u3():
    return diagonal(2, 2, U3)


def d3_eigenvector(a):
    return np.array([a, 0.0, 0.0, np.sqrt(1.0 - a * a)])


def u_a_lambda(a, lam):
    """The 4x4 normal form u(a, lambda) = I + (lambda - 1) y y^t with y = (a, 0, 0, sqrt(1-a^2))."""
    lam = complex(lam)
    s = np.sqrt(1.0 - a * a)
    u = np.eye(4, dtype=complex)
    u[0, 0] = (lam - 1) * a * a + 1
    u[0, 3] = u[3, 0] = (lam - 1) * a * s
    u[3, 3] = lam + (1 - lam) * a * a
    return RelationMatrix(2, 2, u)


def random_unitary(dim, rng):
    if dim == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(dim, random_state=rng)


def random_relation(n, m, rng):
    return RelationMatrix(n, m, random_unitary(n * m, rng))


def random_ball_point(dim, rng, radius=1.0):
    """Uniform sample from the open ball of the given radius in C^dim."""
    if dim == 0:
        return np.zeros(0, dtype=complex)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    r = radius * rng.random() ** (1.0 / (2 * dim))
    return r * v
