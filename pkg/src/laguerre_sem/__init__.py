"""Spectral elements coupled to semi-infinite Laguerre absorbing layers."""
from .basis import (NodalBasis1D, QuadKind, Quadrature1D, laguerre_deriv_matrix, laguerre_eval,
                    lagrange_deriv_matrix, legendre_eval, lgl_quadrature, lgr_quadrature, nodal_basis,
                    slf_eval)
from .mesh import (ElementKind, Mesh, TerrainProfile, attach_semi_infinite_layer, build_finite_mesh,
                   build_interval_mesh, compute_metrics)

__version__ = "0.1.0"

__all__ = [
    "NodalBasis1D",
    "QuadKind",
    "Quadrature1D",
    "laguerre_deriv_matrix",
    "laguerre_eval",
    "lagrange_deriv_matrix",
    "legendre_eval",
    "lgl_quadrature",
    "lgr_quadrature",
    "nodal_basis",
    "slf_eval",
    "ElementKind",
    "Mesh",
    "TerrainProfile",
    "attach_semi_infinite_layer",
    "build_finite_mesh",
    "build_interval_mesh",
    "compute_metrics",
]
