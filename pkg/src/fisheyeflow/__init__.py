"""Fisheye distortion synthesis and appearance-flow rectification toolkit."""

from .camera import (
    DEFAULT_RANGES,
    InversionError,
    ModelKind,
    ParamRanges,
    RadialModel,
    SamplingError,
    SingularityError,
    forward_radius,
    identity_model,
    invert_radius,
    is_monotone,
    load_model,
    sample_model,
    save_model,
)
from .flowfield import (
    FitResult,
    FlowGenerationError,
    build_pyramid,
    downsample_flow,
    fit_model_to_flow,
    gt_flow,
    max_displacement,
    read_flow,
    write_flow,
)
from .losses import (
    AdversarialLoss,
    LossWeights,
    adversarial_loss,
    content_loss,
    enhanced_loss,
    gram,
    l1_loss,
    multi_scale_l1,
    overall_loss,
    style_loss,
)
from .metrics import Bucket, avp, flow_epe, harris_count, psnr, ssim, stratify
from .network import (
    AdamState,
    NetConfig,
    Network,
    TrainConfig,
    backward_and_step,
    build,
    forward,
    load_checkpoint,
    predict_flow_pyramid,
    save_checkpoint,
    train,
)
from .synth import Sample, distort_image, make_dataset, rectify_image
from .warp import downsample_avg, warp_backward, warp_bilinear

__version__ = "0.1.0"
