"""Hybrid reward/dueling best-arm identification."""

from ._core import (
    DegenerateInstance,
    Instance,
    InvalidArgument,
    NotIdentifiable,
    beta_radius,
    characteristic_time,
    cli,
    closed_form_complexities,
    cost_characteristic_time,
    make_instance,
    run,
    sweep,
    validate,
)

__all__ = [
    "DegenerateInstance",
    "Instance",
    "InvalidArgument",
    "NotIdentifiable",
    "beta_radius",
    "characteristic_time",
    "cli",
    "closed_form_complexities",
    "cost_characteristic_time",
    "make_instance",
    "run",
    "sweep",
    "validate",
]
