from .svm import (
    SVM_SCHEMA,
    DegeneracyError,
    SoftmaxBypass,
    SvmConfig,
    SvmModel,
    classify_batch,
    classify_segment,
    train_svm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
