"""Desk-scale numerics and combinatorics for quantum kinetic equations.

The package is organized by capability:

- ``kernel``: interaction profiles in frequency space and the binary
  collision kernel (cross-section and its angular integral).
- ``phase``: phase-space grids, the four Fourier representations and the
  unitary transforms between them, weighted norms, free transport, the
  phase-space density of a density matrix, and flat-file serialization.
- ``collision``: the bilinear gain/loss collision operator on a velocity
  grid, its spectral-side evaluation for separable pair data, and
  conservation diagnostics.
- ``solver``: operator-split time stepping (transport + collision) with
  entropy and conservation diagnostics.
- ``bbgky``: scaled pair-interaction and pair-creation operators of the
  many-body hierarchy and log-log scaling ladders over a mean-free-path
  parameter.
- ``quasifree``: Gaussian wave-packet ensembles, exchange-cycle coordinates
  and closed forms, normalization checks, and supporting combinatorial
  estimates (sign-change counts of random walks, derangement counts).
- ``boardgame``: collapsing maps of collision histories, echelon trees,
  skeleton enumeration, acceptable swap moves, and time-ordering domains.
- ``illposed``: dyadic bad-data constructions, loss-term probes, and
  norm-deflation curves.
- ``cli``: file-driven command-line front end for the above.
"""

from . import kernel, phase, collision, solver, bbgky, quasifree, boardgame, illposed

__version__ = "0.1.0"

__all__ = [
    "kernel",
    "phase",
    "collision",
    "solver",
    "bbgky",
    "quasifree",
    "boardgame",
    "illposed",
    "__version__",
]
