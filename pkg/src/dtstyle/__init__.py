"""Silhouette-constrained neural style transfer for logos, text, and clip art.

Style is synthesized only inside and near the silhouette of the content
image: a distance-transform loss pins every background pixel to the content
with a penalty that grows with (a power of) its distance from the shape.
"""

__version__ = "0.1.0"

from .accel import backend_name
from .distancefield import BinaryMask, DistanceField, binarize, edt, edt_squared, emphasize
from .extractor import (
    FeatureBundle,
    ForwardTrace,
    NetworkSpec,
    NetworkWeights,
    backward_to_input,
    detach,
    forward,
    load_weights,
    spec_for_weights,
    standard_probe_input,
    vgg19_spec,
)
from .imageio import (
    VGG_PREPROCESS,
    Image,
    Preprocess,
    from_tensor,
    load_image,
    resize_bilinear,
    save_png,
    to_tensor,
)
from .losses import (
    GramSet,
    LossReport,
    LossWeights,
    content_loss,
    distance_loss,
    gram,
    gram_set,
    style_grad_to_features,
    style_loss,
    total_loss,
    uniform_style_weights,
)
from .manifest import RunManifest, parse_manifest, render_manifest
from .numerics import (
    ConvLayer,
    PoolRecord,
    conv2d_backward_input,
    conv2d_forward,
    pool2x2_backward,
    pool2x2_forward,
    relu_backward,
    relu_forward,
)
from .optimizer import OptimConfig, OptimState, RunResult, adam_step, init_generated, run

__all__ = [name for name in dir() if not name.startswith("_")]
