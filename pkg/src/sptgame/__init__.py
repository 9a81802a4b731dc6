"""Winning-probability analytics for the contextual triangle game on
thermal 1D cluster-SPT states: exact Pauli algebra, dense statevector and
Gibbs oracles, closed-form thermal cluster results, a free-fermion solver
for the exactly solvable axes, and a METTS Monte-Carlo estimator."""

__version__ = "0.1.0"
