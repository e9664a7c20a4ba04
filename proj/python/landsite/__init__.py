"""Landing-site selection and visual-servo descent simulator."""

from ._core import (
    ConfigError,
    Params,
    control,
    inscribed_radius,
    interaction_matrix,
    likelihoods,
    predict,
    pseudo_inverse,
    run_episode,
    select,
    squared_distance_to_background,
    update,
)

__all__ = [
    "ConfigError",
    "Params",
    "control",
    "inscribed_radius",
    "interaction_matrix",
    "likelihoods",
    "predict",
    "pseudo_inverse",
    "run_episode",
    "select",
    "squared_distance_to_background",
    "update",
]
