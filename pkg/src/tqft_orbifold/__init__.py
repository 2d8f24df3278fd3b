"""Skeletal fusion categories, orbifold data and state sums on triangulated 3-manifolds.

Submodules
----------
skeletal_core
    Category data, loaders and axiom verifiers.
treecalc
    Morphisms as blocks over fusion-tree bases.
frobenius
    Frobenius algebras, modules and relative tensor products.
orbifold
    Orbifold data, their constructions, condition checks and Morita transport.
statesum
    Triangulations and the two state sums.
catalog
    Shipped data files and their generators.
"""
