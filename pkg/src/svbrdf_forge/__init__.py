"""Desk-scale neural appearance toolkit.

Render GGX SVBRDF map stacks under point lights, sample training
exemplar configurations, jointly fit a per-pixel neural material map
with a shared neural renderer, and re-render the result under novel
light and view, including on a sphere.
"""

from .encoding import ENCODED_DIM, EncodingConfig, encode_directions, nd_enc_forward
from .estimator import (
    ConvLayerSpec,
    UNet,
    UNetSpec,
    estimate,
    estimate_from_photo,
    make_unet,
)
from .geometry import (
    D_VIEW,
    PointSource,
    SurfaceGrid,
    direction_field,
    gram_schmidt_rotation,
    half_vector,
    normalize,
    reflect_about,
)
from .ggx import (
    GgxSample,
    combined_brdf,
    decode_alpha,
    eval_brdf,
    fresnel_schlick,
    ndf_d,
    smith_g1,
)
from .maps_io import (
    decode_normal_map,
    load_svbrdf_map_files,
    load_svbrdf_maps,
    read_png_ldr,
    save_png_ldr,
)
from .mlp import (
    DenseLayer,
    MlpNet,
    backward,
    make_nd_enc_net,
    make_renderer_net,
)
from .nbrdf import (
    Adam,
    FitConfig,
    FitResult,
    NeuralParamMap,
    as_brdf,
    fit,
    l1_data_loss,
    pixel_mask,
    pixel_mask_weights,
    render_neural_image,
    render_pixel,
    render_pixel_directions,
)
from .radiometry import (
    DISPLAY_GAMMA,
    ldr_clamp,
    log_compress,
    log_expand,
    log_expand_and_gamma,
)
from .render import (
    RenderJob,
    SvbrdfMaps,
    build_estimator_input,
    colocated_input_render,
    half_angle_cosines,
    log_render,
    render,
    shadow_band,
)
from .sampling import (
    EVAL_KINDS,
    ExemplarConfig,
    RngStream,
    eval_configs,
    identity_config,
    sample_highlight_point,
    sample_light_for_highlight,
    sample_reflect_config,
    sample_view,
)
from .pfm import read_pfm, write_pfm
from .sphere import (
    NeuralMaterialPixel,
    SphereScene,
    cosine_hemisphere_pdf,
    cosine_sample_hemisphere,
    material_frame_directions,
    render_sphere,
    sphere_geometry,
)
from .containers import (
    load_networks,
    load_param_map,
    save_networks,
    save_param_map,
)

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "ConvLayerSpec",
    "DISPLAY_GAMMA",
    "D_VIEW",
    "DenseLayer",
    "ENCODED_DIM",
    "EVAL_KINDS",
    "EncodingConfig",
    "ExemplarConfig",
    "FitConfig",
    "FitResult",
    "GgxSample",
    "MlpNet",
    "NeuralMaterialPixel",
    "NeuralParamMap",
    "PointSource",
    "RenderJob",
    "RngStream",
    "SphereScene",
    "SurfaceGrid",
    "SvbrdfMaps",
    "UNet",
    "UNetSpec",
    "as_brdf",
    "backward",
    "build_estimator_input",
    "colocated_input_render",
    "combined_brdf",
    "cosine_hemisphere_pdf",
    "cosine_sample_hemisphere",
    "decode_alpha",
    "decode_normal_map",
    "direction_field",
    "encode_directions",
    "estimate",
    "estimate_from_photo",
    "eval_brdf",
    "eval_configs",
    "fit",
    "fresnel_schlick",
    "gram_schmidt_rotation",
    "half_angle_cosines",
    "half_vector",
    "identity_config",
    "l1_data_loss",
    "ldr_clamp",
    "load_networks",
    "load_param_map",
    "load_svbrdf_map_files",
    "load_svbrdf_maps",
    "log_compress",
    "log_expand",
    "log_expand_and_gamma",
    "log_render",
    "make_nd_enc_net",
    "make_renderer_net",
    "make_unet",
    "material_frame_directions",
    "nd_enc_forward",
    "ndf_d",
    "normalize",
    "pixel_mask",
    "pixel_mask_weights",
    "read_pfm",
    "read_png_ldr",
    "reflect_about",
    "render",
    "render_neural_image",
    "render_pixel",
    "render_pixel_directions",
    "render_sphere",
    "sample_highlight_point",
    "sample_light_for_highlight",
    "sample_reflect_config",
    "sample_view",
    "save_networks",
    "save_param_map",
    "save_png_ldr",
    "shadow_band",
    "smith_g1",
    "sphere_geometry",
    "write_pfm",
]
