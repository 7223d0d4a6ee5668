"""cklab: desk-scale experiments with Cuntz-Krieger algebras.

Modules
-------
matrix_subshift  transition matrices, admissible words, condition (I)
af_core          finite levels of the AF-core, the endomorphism, product states
path_rep         sparse truncated representation, gauge action, spectral projections
crossed_product  the isometry S, covariance and generator recovery
fd_bimodule      finite-dimensional Hilbert bimodules and their dual partial maps
uniqueness_lab   norm-gap witnesses and cross-model norm agreement
cli              the ``cklab`` command
"""

__version__ = "0.1.0"
