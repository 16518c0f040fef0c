from .metrics import (
    MATCH_POLICIES,
    EvalReport,
    LabelCounts,
    evaluate,
    evaluate_corpus,
    f_score,
    match_events,
    overlap_frames,
)
from .bench import BenchRun, ThroughputReport, benchmark
from .heatmap import (
    conv5_response_maps,
    filter_heatmap,
    save_heatmap,
    temporal_discontinuity_score,
)

__all__ = [name for name in dir() if not name.startswith("_")]
