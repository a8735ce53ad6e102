"""Icosahedral invariants, equivariant maps and the dynamics of symmetric rational maps."""

from .forms import BivariateForm, canonical, hessian_det, jacobian_det, verify_syzygy
from .group import ProjectivePoint, icosahedral_group, orbit_of, special_orbits

__version__ = "0.1.0"

__all__ = [
    "BivariateForm",
    "ProjectivePoint",
    "canonical",
    "hessian_det",
    "icosahedral_group",
    "jacobian_det",
    "orbit_of",
    "special_orbits",
    "verify_syzygy",
]
