"""Training-free object replacement in synthetic videos.

The pipeline edits a video in latent space in two masked sampling stages:
a rough pass swaps the object inside a dilated source mask, a refinement
pass re-runs sampling under the union of the source and rough-object masks,
and per-step blending against an inversion trajectory keeps everything
outside the final mask bit-exact to the source.  All components (codec,
denoiser, embedder, segmenter) are pluggable; the in-repo stand-ins are
analytic, so every quantity has a checkable closed form.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .codec import Codec, IdentityCodec, LinearCodec
from .container import (
    read_container,
    read_trajectory,
    write_container,
    write_ppm_frames,
    write_trajectory,
)
from .denoise import (
    ConstantDenoiser,
    Denoiser,
    GaussianComponent,
    GmmDenoiser,
    conditioned_eps,
)
from .errors import (
    ConfigError,
    ContainerError,
    DegenerateScheduleError,
    EmptyMaskError,
    LatentcutError,
    ShapeMismatchError,
    UnknownConditionError,
)
from .guidance import (
    ZERO_IMAGE,
    ConditionSet,
    Embedding,
    EmbeddingProvider,
    HashEmbedder,
    build_condition_set,
    canonical_descriptor,
    cfg_combine,
    zero_image_guidance,
)
from .masking import (
    ColorSegmenter,
    Segmenter,
    build_final_mask,
    dilate,
    mask_union,
    shrink_mask,
)
from .metrics import (
    PooledFrameEmbedder,
    changed_fraction,
    changed_pixels,
    psnr,
    temporal_score,
)
from .pipeline import (
    EditConfig,
    EditDeps,
    EditResult,
    StageResult,
    condition_from_config,
    paste_rough,
    run_edit,
    run_stage,
)
from .sampler import (
    InversionTrajectory,
    ddim_invert_step,
    ddim_step,
    denoise_trajectory,
    forward_noise,
    invert_trajectory,
)
from .scenario import (
    ObjectSpec,
    ScenarioSpec,
    assemble_run,
    canonical_run_spec,
    canonical_scenario,
    render_reference,
    scenario_denoiser,
    scenario_from_dict,
    synth_video,
)
from .schedule import (
    DEFAULT_BETA_END,
    DEFAULT_BETA_START,
    DEFAULT_STEPS,
    NoiseSchedule,
    TimestepPlan,
    linear_schedule,
    make_plan,
    rho_start_latent,
)
from .tensors import SeedStream, as_latent, as_mask, blend, gaussian, l2_rel
