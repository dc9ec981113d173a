import numpy as np
import pytest

from magband import FieldConfig, Lorentzian, scale, solve_fiber
from magband.eigensolver import TridiagonalMatrix, eigenvector, lowest_eigenvalues
from magband.oracles import brute_dense_eigs


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile every jitted kernel once up front so tests that time the solver
    # measure the solver, not the JIT
    m = TridiagonalMatrix(np.array([2.0, 2.0]), np.array([1.0]))
    lowest_eigenvalues(m, 2, 1e-8)
    lowest_eigenvalues(m, 2, 1e-8, guesses=np.array([1.0, 3.0]), slack=0.5)
    eigenvector(m, 1.0)
    brute_dense_eigs(m)
    solve_fiber(scale(Lorentzian(1.0, 1.0), 0.0), FieldConfig(1.0), 0.0, 1, 1e-3)
