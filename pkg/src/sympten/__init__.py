"""Symplectic tensor toolkit: Koszul complexes, Sp(2n)-irreducible splittings of
torsion-like tensors, their quadratic invariants, and almost symplectic connections
on coordinate charts."""

from .linear import (SympMap, SympSpace, Tensor, act, antisymmetrize, contract_omega,
                     random_symplectic, standard_space, symmetrize, tensor, tensor_from_json,
                     tensor_to_json)
from .koszul import homotopy_defect, koszul_A, koszul_B, verify_exactness
from .decomposition import decompose_torsion, projector_ranks
from .invariants import classify_traces, eval_trace, r_invariants, unique_invariant
from .chart import Chart, Field, load_shipped
from .connections import (Connection, make_almost_symplectic, nabla_omega, tondeur,
                          torsion_invariant)

__version__ = "0.1.0"
