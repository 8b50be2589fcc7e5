"""Through-wall RF links in insulated concrete walls.

Thin wrapper over the C++ core. Layer stacks are lists of
``(material, thickness_mm)`` pairs; omitted stacks mean the reference
70/220/150 mm concrete-rockwool-concrete wall.
"""

from ._stwall import (
    NotFound,
    NumericalError,
    cable_loss_db,
    fit_permittivity,
    improvement_onset_ghz,
    link,
    materials,
    permittivity,
    run_cli,
    slab_transmission,
    transmission,
    u_value,
    u_value_fv,
)

__all__ = [
    "NotFound",
    "NumericalError",
    "cable_loss_db",
    "fit_permittivity",
    "improvement_onset_ghz",
    "link",
    "materials",
    "permittivity",
    "run_cli",
    "slab_transmission",
    "transmission",
    "u_value",
    "u_value_fv",
]
