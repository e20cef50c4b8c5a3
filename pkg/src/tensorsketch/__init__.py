"""Tensor-trained sketching matrices for low-rank approximation of matrix streams.

Training slices are stacked into a third-order tensor; a Tucker1 fit of its
mode-1 unfolding (closed form) or a Tucker2 fit by HOOI yields sketching
matrices that are then used to approximate new matrices from the stream.
"""

from .errors import (
    ConvergenceError,
    FormatError,
    NotOrthonormalError,
    ShapeError,
    TensorSketchError,
)
from .formats import (
    load_sketch,
    load_sketch_pair,
    load_t3b,
    save_sketch,
    save_sketch_pair,
    save_t3b,
)
from .harness import (
    Dataset,
    EvalReport,
    SynthConfig,
    evaluate,
    run_oracle,
    run_random,
    run_tensor_based,
    run_two_sided,
    sample_ratio_sweep,
    synth_stream,
    test_error,
)
from .linalg import (
    QrFactors,
    SvdFactors,
    frobenius_norm,
    matmul,
    qr_thin,
    subspace_distance,
    svd_full,
    svd_truncated,
)
from .lowrank import (
    LowRankApprox,
    best_rank_r,
    relaxation_bound_check,
    scw,
    scw_orthogonalization_variant,
    theorem2_gap,
    two_sided_scw,
)
from .sketch import (
    HooiConfig,
    HooiDiagnostics,
    Provenance,
    Sketch,
    SketchPair,
    random_gaussian_sketch,
    random_orthonormal_sketch,
    random_sign_sketch,
    train_tucker1,
    train_tucker2_hooi,
)
from .tensor import Tensor3, frobenius_norm_tensor, nmode_product, unfold_mode

__version__ = "0.1.0"
