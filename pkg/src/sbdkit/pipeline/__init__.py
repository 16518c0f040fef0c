from .postprocess import (
    PostProcessConfig,
    bhattacharyya_distance,
    bhattacharyya_filter,
    color_histogram,
    localize_sharp,
)
from .detect import Detector, SegmentLabeling, detect, detect_with_labeler, merge_labelings

__all__ = [name for name in dir() if not name.startswith("_")]
