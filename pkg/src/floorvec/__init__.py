"""Vector floorplans from segmentation maps and junction heatmaps."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    FloorplanModel,
    Icon,
    IconClass,
    InterestPoint,
    InterestPointSet,
    Opening,
    Room,
    RoomClass,
    Wall,
    validate_model,
)
from .raster import extract_interest_points, render  # noqa: E402
from .svgio import load_model, parse_annotation, parse_model, serialize_model  # noqa: E402
from .vectorizer import VectorizeConfig, vectorize  # noqa: E402

__all__ = [
    "FloorplanModel", "Icon", "IconClass", "InterestPoint", "InterestPointSet", "Opening",
    "Room", "RoomClass", "VectorizeConfig", "Wall", "__version__", "extract_interest_points",
    "load_model", "parse_annotation", "parse_model", "render", "serialize_model",
    "validate_model", "vectorize",
]
