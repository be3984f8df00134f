"""Computational tomography laboratory: numpy front end for the C++ core."""

from ._ctlab import (
    ProjectionGeometry,
    admm_reconstruct,
    back_project,
    forward_project,
    framelet_analysis,
    framelet_synthesis,
    hqs_reconstruct,
    load_grid,
    mse,
    psnr,
    random_phantom,
    sart,
    save_grid,
    shepp_logan,
)

__all__ = [
    "ProjectionGeometry",
    "admm_reconstruct",
    "back_project",
    "forward_project",
    "framelet_analysis",
    "framelet_synthesis",
    "hqs_reconstruct",
    "load_grid",
    "mse",
    "psnr",
    "random_phantom",
    "sart",
    "save_grid",
    "shepp_logan",
]
