from .schedules import (
    SCHEDULE_LENGTH,
    AlphaSchedule,
    make_dissolve_schedule,
    make_sharp_schedule,
    no_transition_schedule,
)
from .wipes import (
    WIPE_FAMILIES,
    WipeMatteFamily,
    progress_field,
    render_matte,
    render_wipe_schedule,
    sample_wipe_family,
    schedule_from_descriptor,
)
from .composite import composite, composite_clip
from .dataset import SynthesisSpec, find_clean_spans, render_segment, synthesize_dataset
from .bootstrap import (
    BOOTSTRAP_SCHEMA,
    export_bootstrap_candidates,
    import_bootstrap_package,
)

__all__ = [name for name in dir() if not name.startswith("_")]
