# Statistics of the exemplar light/view sampler.
#
# Training exemplars pair a cosine-sampled view with a light placed so
# the mirror highlight lands on a chosen surface point.  This script
# draws a batch and checks the construction numerically.

import numpy as np

from svbrdf_forge.geometry import half_vector, normalize
from svbrdf_forge.sampling import RngStream, eval_configs

rng = RngStream(7)
configs = eval_configs("reflect", 200, rng)

heights = np.array([c.light_position[2] for c in configs])
dists = np.array([np.linalg.norm(c.light_position) for c in configs])
print("lights: z in [%.3f, %.3f], |p| in [%.3f, %.3f]"
      % (heights.min(), heights.max(), dists.min(), dists.max()))

# At each config's highlight point (a 2-vector on the z=0 surface) the
# half vector of the light and view directions should be the surface
# normal, i.e. (0, 0, 1).
errs = []
for c in configs:
    p = np.array([c.highlight_point[0], c.highlight_point[1], 0.0])
    wi = normalize(c.light_position - p)
    wo = normalize(c.view_position - p)
    h = half_vector(wi, wo)
    errs.append(np.linalg.norm(h - [0.0, 0.0, 1.0]))
errs = np.array(errs)
print("half-vector alignment at the highlight point: worst %.2e" % errs.max())

# Highlight points are drawn uniform on the square plus a wide Gaussian
# jitter, so some land outside the surface; those still make valid, just
# oblique, configurations.
pts = np.array([c.highlight_point for c in configs])
on_surface = np.mean(np.all(np.abs(pts) <= 1.0, axis=1))
print("highlight x range [%.3f, %.3f], y range [%.3f, %.3f], %d%% on-surface"
      % (pts[:, 0].min(), pts[:, 0].max(),
         pts[:, 1].min(), pts[:, 1].max(), round(100 * on_surface)))

# Same seed, same draws.
again = eval_configs("reflect", 200, RngStream(7))
same = all(np.array_equal(a.light_position, b.light_position)
           for a, b in zip(configs, again))
print("reproducible under the seed:", same)
