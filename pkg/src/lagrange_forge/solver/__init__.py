"""Inverse-problem solvers: Methods 1 and 2 and 1D reconstruction."""
from .ansatz import AnsatzFamily, monomials, sample_columns
from .linalg import Kernel, nullspace, rref_basis
from .methods import (DirectResult, FamilyMember, Method1, Method2, SolutionFamily,
                      imposed_residuals, method1, method2)
from .reconstruct import (LagrangianReconstructor, default_completion_basis,
                          double_antiderivative, reconstruct_lagrangian_1d)

__all__ = [
    "AnsatzFamily", "monomials", "sample_columns", "Kernel", "nullspace", "rref_basis",
    "DirectResult", "FamilyMember", "Method1", "Method2", "SolutionFamily", "imposed_residuals",
    "method1", "method2", "LagrangianReconstructor", "default_completion_basis",
    "double_antiderivative", "reconstruct_lagrangian_1d",
]
