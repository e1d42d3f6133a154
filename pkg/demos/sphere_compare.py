# Compare a fitted neural material against ground truth on a sphere.
#
# The fit only ever sees a flat patch, so wrapping one of its pixels
# around a sphere under a new light is a real extrapolation test: every
# surface point queries the model at directions the training set never
# contained.  We fit a glossy material briefly, then render the same
# sphere twice, once with the true GGX parameters and once with the
# fitted per-pixel model, and compare highlight positions.

import time
from pathlib import Path

import numpy as np

from svbrdf_forge.geometry import PointSource
from svbrdf_forge.ggx import GgxSample
from svbrdf_forge.maps_io import save_png_ldr
from svbrdf_forge.nbrdf import FitConfig, fit
from svbrdf_forge.radiometry import ldr_clamp
from svbrdf_forge.render import RenderJob, SvbrdfMaps, colocated_input_render, render
from svbrdf_forge.sampling import RngStream, eval_configs
from svbrdf_forge.sphere import NeuralMaterialPixel, SphereScene, render_sphere

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

up = np.array([0.0, 0.0, 1.0])
size = 16

# Dark glossy dielectric: alpha 0.2 gives a tight but visible lobe.
maps = SvbrdfMaps(
    diffuse=np.full((size, size, 3), 0.05),
    specular=np.ones((size, size, 3)),
    normal=np.broadcast_to(up, (size, size, 3)).copy(),
    roughness=np.full((size, size), np.sqrt(0.2)),
)

configs = eval_configs("reflect", 8, RngStream(4))
targets = []
for config in configs:
    job = RenderJob(maps=maps, light=PointSource(config.light_position),
                    view_position=config.view_position)
    targets.append((render(job), config))
photo = colocated_input_render(maps)

print("fitting (short budget, expect a looser match than a full run)...")
start = time.perf_counter()
result = fit(targets, photo, FitConfig(seed=0, iterations=600))
print("final loss %.4f in %.0fs" % (result.final_loss,
                                    time.perf_counter() - start))

# Novel condition: light off to the side, orthographic view from +z.
light = PointSource([2.0, 0.0, 4.0])

truth_scene = SphereScene(light=light,
                          material=GgxSample(0.05 * np.ones(3), np.ones(3),
                                             up, 0.2),
                          resolution=128)
truth = render_sphere(truth_scene)

pixel = NeuralMaterialPixel(result.param_map.values[8, 8], up,
                            result.renderer, result.nd_enc)
neural = render_sphere(SphereScene(light=light, material=pixel,
                                   resolution=128))

def peak(img):
    return np.unravel_index(np.argmax(img.sum(axis=2)), img.shape[:2])

p_true, p_fit = peak(truth), peak(neural)
dist = float(np.hypot(p_true[0] - p_fit[0], p_true[1] - p_fit[1]))
print("highlight: truth %s, fitted %s, %.1f px apart" % (p_true, p_fit, dist))

save_png_ldr(out_dir / "sphere_truth.png", ldr_clamp(truth))
save_png_ldr(out_dir / "sphere_fitted.png", ldr_clamp(neural))
print("wrote sphere_truth.png and sphere_fitted.png under", out_dir)
