# Push a capture through the convolutional latent estimator.
#
# The estimator maps a 4-channel raster (log photo + half-angle cosine)
# to a per-pixel latent map in one shot.  Untrained weights produce an
# uninformative map, but the plumbing is the point here: input builds,
# shapes line up, and the output drops straight into the fit loop as a
# warm start.

import numpy as np

from svbrdf_forge.estimator import UNetSpec, estimate_from_photo, make_unet
from svbrdf_forge.geometry import D_VIEW
from svbrdf_forge.radiometry import log_compress
from svbrdf_forge.render import SvbrdfMaps, colocated_input_render

size = 32
rng = np.random.default_rng(0)

# A noisy diffuse texture so the input is not constant.
maps = SvbrdfMaps(
    diffuse=np.clip(rng.normal(0.4, 0.1, (size, size, 3)), 0.0, 1.0),
    specular=np.full((size, size, 3), 0.04),
    normal=np.broadcast_to([0.0, 0.0, 1.0], (size, size, 3)).copy(),
    roughness=np.full((size, size), 0.6),
)

photo_log = log_compress(colocated_input_render(maps))
capture_point = np.array([0.0, 0.0, D_VIEW])

# base_width 4 keeps this toy sized; the default is far wider.
unet = make_unet(rng, UNetSpec(base_width=4))
param_map = estimate_from_photo(photo_log, capture_point, capture_point, unet)

print("input photo:", photo_log.shape)
print("latent map: %dx%d, %d channels per pixel"
      % (param_map.height, param_map.width, param_map.channels))
v = param_map.values
print("latent stats: min %.3f, max %.3f, mean %.3f"
      % (v.min(), v.max(), v.mean()))
print("finite:", bool(np.all(np.isfinite(v))))
