# Fitting through a cast-shadow band.
#
# Real captures contain shadowed regions the point-light model cannot
# explain.  The shadow_band helper fakes one: a soft dark stripe across
# the image, oriented by the light position.  Fitting against banded
# exemplars shows the loss still converges; the model simply absorbs
# the band into its per-pixel latents.

import numpy as np

from svbrdf_forge.geometry import PointSource
from svbrdf_forge.nbrdf import FitConfig, fit, l1_data_loss, render_neural_image
from svbrdf_forge.radiometry import log_compress
from svbrdf_forge.render import RenderJob, SvbrdfMaps, render, shadow_band
from svbrdf_forge.sampling import RngStream, eval_configs

size = 16
maps = SvbrdfMaps(
    diffuse=np.broadcast_to([0.45, 0.35, 0.3], (size, size, 3)).copy(),
    specular=np.full((size, size, 3), 0.04),
    normal=np.broadcast_to([0.0, 0.0, 1.0], (size, size, 3)).copy(),
    roughness=np.full((size, size), 0.7),
)

configs = eval_configs("reflect", 8, RngStream(2))
targets = []
for config in configs:
    job = RenderJob(maps=maps, light=PointSource(config.light_position),
                    view_position=config.view_position)
    image = render(job)
    band = shadow_band(size, size, config.light_position)
    targets.append((image * band[..., None], config))

darkest = min(float(t[0].min()) for t in targets)
print("banded exemplars rendered, darkest value %.4f" % darkest)

result = fit(targets, None, FitConfig(seed=0, iterations=400))
print("loss %.4f -> final %.4f" % (result.loss_trace[0], result.final_loss))

img, config = targets[0]
pred = render_neural_image(result.param_map, config,
                           result.renderer, result.nd_enc)
print("held-in banded exemplar log L1: %.4f"
      % l1_data_loss(pred, log_compress(img)))
