# Fit the neural material model to a constant gray Lambertian patch.
#
# This is the smallest end-to-end use of the fitting loop: render a
# handful of exemplars from known GGX maps, then jointly optimize the
# per-pixel latent map, the direction compressor, and the shared
# renderer until the re-rendered exemplars match.  A short iteration
# budget keeps the run under a minute; the loss is already well down
# by then but nowhere near the floor a full run reaches.

import time
from pathlib import Path

import numpy as np

from svbrdf_forge.containers import save_networks, save_param_map
from svbrdf_forge.geometry import PointSource
from svbrdf_forge.nbrdf import FitConfig, fit, l1_data_loss, render_neural_image
from svbrdf_forge.radiometry import log_compress
from svbrdf_forge.render import RenderJob, SvbrdfMaps, render
from svbrdf_forge.sampling import RngStream, eval_configs

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

size = 16

# Constant 50% gray diffuse, no specular lobe, flat normals, roughness
# pegged at its matte end.  Every pixel should learn the same latent.
maps = SvbrdfMaps(
    diffuse=np.full((size, size, 3), 0.5),
    specular=np.zeros((size, size, 3)),
    normal=np.broadcast_to([0.0, 0.0, 1.0], (size, size, 3)).copy(),
    roughness=np.ones((size, size)),
)

configs = eval_configs("reflect", 8, RngStream(0))
targets = []
for config in configs:
    job = RenderJob(maps=maps, light=PointSource(config.light_position),
                    view_position=config.view_position)
    targets.append((render(job), config))

fit_config = FitConfig(seed=0, iterations=400)

start = time.perf_counter()
result = fit(targets, None, fit_config)
elapsed = time.perf_counter() - start

trace = result.loss_trace
print("iterations: %d in %.1fs" % (len(trace), elapsed))
print("loss: %.4f -> %.4f (final re-eval %.4f)"
      % (trace[0], trace[-1], result.final_loss))
print("first 10 iterations strictly decreasing:",
      bool(np.all(np.diff(trace[:10]) < 0)))

# Re-render the first exemplar with the fitted model and compare in the
# log domain, the same space the optimizer saw.
img, config = targets[0]
pred = render_neural_image(result.param_map, config,
                           result.renderer, result.nd_enc)
print("held-in exemplar log L1: %.4f" % l1_data_loss(pred, log_compress(img)))

# A constant material should give a nearly constant latent map.
flat = result.param_map.values.reshape(-1, result.param_map.channels)
spread = np.linalg.norm(flat - flat.mean(axis=0), axis=1)
print("latent spread: mean %.4f, max %.4f (vector scale %.2f)"
      % (spread.mean(), spread.max(), np.linalg.norm(flat.mean(axis=0))))

save_param_map(out_dir / "constant_fit.npm", result.param_map)
save_networks(out_dir / "constant_fit.nbrf",
              renderer=result.renderer, nd_enc=result.nd_enc)
print("wrote", out_dir / "constant_fit.npm", "and", out_dir / "constant_fit.nbrf")
