# Render a flat material patch under a point light.
#
# The surface is the unit square [0,1]^2 at z=0, one texel per pixel.
# We build a synthetic material whose roughness sweeps from glossy on
# the left to matte on the right, light it from an off-axis position,
# and write both the HDR result (PFM) and a gamma-encoded preview PNG.

from pathlib import Path

import numpy as np

from svbrdf_forge.geometry import PointSource
from svbrdf_forge.maps_io import save_png_ldr
from svbrdf_forge.pfm import write_pfm
from svbrdf_forge.radiometry import ldr_clamp
from svbrdf_forge.render import RenderJob, SvbrdfMaps, colocated_input_render, render

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

size = 128

# Diffuse is a warm constant, specular a dim neutral 4%, normals flat up.
diffuse = np.broadcast_to([0.42, 0.3, 0.2], (size, size, 3)).copy()
specular = np.full((size, size, 3), 0.04)
normal = np.broadcast_to([0.0, 0.0, 1.0], (size, size, 3)).copy()

# The roughness map stores sqrt(alpha).  A left-to-right ramp from 0.2
# to 0.9 covers mirror-adjacent through nearly Lambertian behavior.
ramp = np.linspace(0.2, 0.9, size)
roughness = np.broadcast_to(ramp, (size, size)).copy()

maps = SvbrdfMaps(diffuse, specular, normal, roughness)

# Light sits up and to the left, view straight overhead.
job = RenderJob(
    maps=maps,
    light=PointSource([-0.5, 0.25, 2.0], [12.0, 12.0, 12.0]),
    view_position=[0.5, 0.5, 4.0],
)
image = render(job)

print("oblique render:", image.shape, "max", float(image.max()))

write_pfm(out_dir / "flat_oblique.pfm", image)
save_png_ldr(out_dir / "flat_oblique.png", ldr_clamp(image))

# The colocated render is the capture geometry the fitting pipeline
# assumes for the input photograph: light and camera share a point on
# the surface axis.  On a uniform material the highlight would land
# dead center; on this ramp the peak stays on the center row but pulls
# toward the glossy side, where the lobe concentrates its energy.
photo = colocated_input_render(maps)
print("colocated render:", photo.shape, "max", float(photo.max()))
peak = np.unravel_index(np.argmax(photo.sum(axis=2)), (size, size))
print("brightest pixel:", peak, "(center is", (size // 2, size // 2), ")")

write_pfm(out_dir / "flat_colocated.pfm", photo)
save_png_ldr(out_dir / "flat_colocated.png", ldr_clamp(photo))

# With falloff enabled, radiance picks up an inverse-square distance
# term.  For a light two units up that dims everything noticeably.
dimmed = render(RenderJob(
    maps=maps,
    light=PointSource([-0.5, 0.25, 2.0], [12.0, 12.0, 12.0]),
    view_position=[0.5, 0.5, 4.0],
    falloff=True,
))
print("mean radiance without falloff:", float(image.mean()))
print("mean radiance with falloff:   ", float(dimmed.mean()))
