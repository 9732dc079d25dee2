"""Post-processing from segmentation maps and heatmaps to a vector floorplan."""

from .objects import extract_icons, extract_openings
from .peaks import detect_peaks, refine_centroid
from .pipeline import VectorizeConfig, VectorizeResult, vectorize
from .rooms import CellGrid, build_cell_grid, extract_rooms, rectangles_outline
from .walls import WallSkeleton, build_wall_skeleton, estimate_wall_width, snap_coordinates

__all__ = [
    "CellGrid",
    "VectorizeConfig",
    "VectorizeResult",
    "WallSkeleton",
    "build_cell_grid",
    "build_wall_skeleton",
    "detect_peaks",
    "estimate_wall_width",
    "extract_icons",
    "extract_openings",
    "extract_rooms",
    "rectangles_outline",
    "refine_centroid",
    "snap_coordinates",
    "vectorize",
]
