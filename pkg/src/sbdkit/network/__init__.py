from .model import (
    FEATURE_LAYERS,
    FULL_CONV_FILTERS,
    FULL_FC_WIDTH,
    INPUT_SHAPE,
    LAYER_TABLE,
    C3Dsbd,
    C3DsbdConfig,
    init_weights,
    normalize_batch,
    prepare_batch,
    segments_to_batch,
    softmax_rows,
)
from .train import (
    CHECKPOINT_SCHEMA,
    Checkpoint,
    ManifestDataset,
    TrainSchedule,
    extract_features,
    train,
)
from .gradcheck import REDUCED_CONFIG, GradcheckReport, gradcheck

__all__ = [name for name in dir() if not name.startswith("_")]
