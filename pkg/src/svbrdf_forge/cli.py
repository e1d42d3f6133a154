"""Command line driver for the appearance pipeline.

Subcommands cover the full loop: render ground-truth maps, sample
light/view configurations and materialize their exemplar renders,
estimate or fit a latent material, re-light it, and re-render it on a
sphere, plus gradient and smoke self-checks.  Every command that writes
results also drops a run manifest next to them.

Vector flags take comma-separated components (e.g. --light 0,0,4).  The
fit targets directory holds an ``exemplars.json`` configuration list and
one ``exemplar_NNN.pfm`` per entry, the layout ``sample-exemplars
--render-maps`` produces.
"""

from __future__ import annotations

import os


def _apply_thread_cap() -> None:
    """Honor SVBRDF_FORGE_THREADS before numpy initializes its BLAS pool."""
    cap = os.environ.get("SVBRDF_FORGE_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)


_apply_thread_cap()

import argparse
import json
import sys
import tempfile

import numpy as np

from . import containers, gradcheck, maps_io, pfm, radiometry, sampling
from .encoding import EncodingConfig
from .estimator import UNetSpec, estimate, make_unet
from .geometry import D_VIEW, PointSource
from .ggx import GgxSample, decode_alpha
from .manifest import RunManifest, config_digest, write_run_manifest
from .mlp import make_nd_enc_net, make_renderer_net
from .nbrdf import FitConfig, fit, render_neural_image
from .render import (
    RenderJob,
    SvbrdfMaps,
    build_estimator_input,
    colocated_input_render,
    shadow_band,
)
from .render import render as render_image
from .sampling import ExemplarConfig, RngStream
from .sphere import NeuralMaterialPixel, SphereScene, render_sphere

EXEMPLARS_JSON = "exemplars.json"
EXEMPLARS_VERSION = 1


def _parse_vec(text: str, length: int, flag: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != length:
        raise ValueError(
            f"{flag} expects {length} comma-separated numbers, got {text!r}"
        )
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ValueError(f"{flag} has a non-numeric component in {text!r}")


def _out_dir(path: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    return directory


def _encoding_meta(config: EncodingConfig = EncodingConfig()) -> dict:
    return {
        "frequency_count": config.frequency_count,
        "compressed_dim": config.compressed_dim,
    }


def _package_version() -> str:
    from . import __version__

    return __version__


def _manifest(command: str, **kwargs) -> RunManifest:
    return RunManifest(command=command, software_version=_package_version(),
                       **kwargs)


def _write_display(path, linear_image) -> None:
    display = radiometry.ldr_clamp(np.maximum(linear_image, 0.0)) ** (
        1.0 / radiometry.DISPLAY_GAMMA
    )
    maps_io.save_png_ldr(path, display, encode_gamma=False)


def _config_entry(config: ExemplarConfig) -> dict:
    return {
        "light": [float(v) for v in config.light_position],
        "view": [float(v) for v in config.view_position],
        "highlight": None if config.highlight_point is None
        else [float(v) for v in config.highlight_point],
    }


def _config_from_entry(entry: dict) -> ExemplarConfig:
    highlight = entry.get("highlight")
    return ExemplarConfig(
        np.asarray(entry["light"], dtype=np.float64),
        np.asarray(entry["view"], dtype=np.float64),
        None if highlight is None else np.asarray(highlight, dtype=np.float64),
    )


def _read_exemplars_json(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict) or data.get("version") != EXEMPLARS_VERSION:
        raise ValueError(f"unsupported exemplar list in {path!r}")
    return [_config_from_entry(entry) for entry in data["configs"]]


def _exemplar_pfm_name(index: int) -> str:
    return f"exemplar_{index:03d}.pfm"


def _read_targets_dir(directory: str):
    """Load (linear image, config) pairs from a targets directory."""
    json_path = os.path.join(directory, EXEMPLARS_JSON)
    if not os.path.isfile(json_path):
        candidates = [f for f in sorted(os.listdir(directory))
                      if f.endswith(".json")]
        if len(candidates) != 1:
            raise ValueError(
                f"no {EXEMPLARS_JSON} in {directory!r} and no unique"
                " .json fallback"
            )
        json_path = os.path.join(directory, candidates[0])
    configs = _read_exemplars_json(json_path)
    pairs = []
    for k, config in enumerate(configs):
        image_path = os.path.join(directory, _exemplar_pfm_name(k))
        image = pfm.read_pfm(image_path).astype(np.float64)
        pairs.append((image, config))
    return pairs, json_path


def _render_exemplar(maps, config: ExemplarConfig, falloff: bool,
                     use_band: bool, ldr: bool,
                     white_point: float) -> np.ndarray:
    job = RenderJob(maps=maps, light=PointSource(config.light_position),
                    view_position=config.view_position, falloff=falloff)
    image = render_image(job)
    if use_band:
        band = shadow_band(maps.height, maps.width, config.light_position)
        image = image * band[..., None]
    if ldr:
        image = radiometry.ldr_clamp(image, white_point)
    return image


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_render(args) -> int:
    maps = maps_io.load_svbrdf_maps(args.maps, strict=not args.lenient)
    light = _parse_vec(args.light, 3, "--light")
    view = _parse_vec(args.view, 3, "--view")
    intensity = _parse_vec(args.intensity, 3, "--intensity")
    job = RenderJob(
        maps=maps,
        light=PointSource(light, intensity),
        view_position=view,
        falloff=args.falloff,
    )
    image = render_image(job)
    if args.ldr_clamp:
        image = radiometry.ldr_clamp(image, args.white_point)
    directory = _out_dir(args.out)
    pfm.write_pfm(args.out, image)
    outputs = [args.out]
    if args.display:
        _write_display(args.display, image)
        outputs.append(args.display)
    write_run_manifest(directory, _manifest(
        "render", falloff=args.falloff, inputs=[args.maps], outputs=outputs,
    ))
    return 0


def _cmd_sample_exemplars(args) -> int:
    rng = RngStream(args.seed)
    configs = sampling.eval_configs(args.kind, args.count, rng)
    serialized = {
        "version": EXEMPLARS_VERSION,
        "kind": args.kind,
        "seed": args.seed,
        "configs": [_config_entry(c) for c in configs],
    }
    directory = _out_dir(args.out)
    with open(args.out, "w", encoding="utf-8") as handle:
        json.dump(serialized, handle, indent=2)
        handle.write("\n")
    outputs = [args.out]
    inputs = []
    if args.render_maps:
        maps = maps_io.load_svbrdf_maps(args.render_maps,
                                        strict=not args.lenient)
        inputs.append(args.render_maps)
        for k, config in enumerate(configs):
            image = _render_exemplar(maps, config, args.falloff,
                                     args.shadow_band, args.ldr_clamp,
                                     args.white_point)
            path = os.path.join(directory, _exemplar_pfm_name(k))
            pfm.write_pfm(path, image)
            outputs.append(path)
    write_run_manifest(directory, _manifest(
        "sample-exemplars", seed=args.seed, falloff=args.falloff,
        inputs=inputs, outputs=outputs,
    ))
    return 0


def _cmd_estimate(args) -> int:
    photo = pfm.read_pfm(args.input).astype(np.float64)
    photo_log = radiometry.log_compress(np.maximum(photo, 0.0))
    nets = containers.load_networks(args.net)
    if "unet" not in nets:
        raise ValueError("network file has no estimator section")
    light = _parse_vec(args.light, 3, "--light")
    view = _parse_vec(args.view, 3, "--view")
    param_map = estimate(build_estimator_input(photo_log, light, view),
                         nets["unet"])
    directory = _out_dir(args.out)
    containers.save_param_map(args.out, param_map)
    write_run_manifest(directory, _manifest(
        "estimate", inputs=[args.input, args.net], outputs=[args.out],
    ))
    return 0


def _config_dict(config: FitConfig) -> dict:
    return {name: getattr(config, name) for name in config.__dataclass_fields__}


def _cmd_fit(args) -> int:
    targets, json_path = _read_targets_dir(args.targets)
    if args.config:
        with open(args.config, "r", encoding="utf-8") as handle:
            config_text = handle.read()
        fit_config = FitConfig.from_json(config_text)
    else:
        fit_config = FitConfig(exemplar_count=len(targets))
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.iterations is not None:
        overrides["iterations"] = args.iterations
    if overrides:
        fit_config = FitConfig(**{**_config_dict(fit_config), **overrides})

    input_photo = None
    inputs = [json_path]
    if args.input:
        input_photo = pfm.read_pfm(args.input).astype(np.float64)
        inputs.append(args.input)

    result = fit(targets, input_photo, fit_config)

    directory = _out_dir(args.out_params)
    _out_dir(args.out_net)
    containers.save_param_map(args.out_params, result.param_map)
    containers.save_networks(args.out_net, renderer=result.renderer,
                             nd_enc=result.nd_enc)
    config_text = fit_config.to_json()
    write_run_manifest(directory, _manifest(
        "fit", seed=fit_config.seed, config_hash=config_digest(config_text),
        encoding=_encoding_meta(),
        inputs=inputs + [args.targets],
        outputs=[args.out_params, args.out_net],
        extra={"final_loss": result.final_loss,
               "loss_trace": [float(v) for v in result.loss_trace]},
    ))
    print(f"final masked L1 loss: {result.final_loss:.6f}")
    return 0


def _cmd_relight(args) -> int:
    param_map = containers.load_param_map(args.params)
    nets = containers.load_networks(args.net)
    if "renderer" not in nets or "nd_enc" not in nets:
        raise ValueError("network file must hold renderer and nd_enc sections")
    light = _parse_vec(args.light, 3, "--light")
    view = _parse_vec(args.view, 3, "--view")
    config = ExemplarConfig(light, view)
    y = render_neural_image(param_map, config, nets["renderer"], nets["nd_enc"])
    linear = np.maximum(np.expm1(y), 0.0)
    directory = _out_dir(args.out)
    pfm.write_pfm(args.out, linear)
    outputs = [args.out]
    if args.display:
        _write_display(args.display, linear)
        outputs.append(args.display)
    write_run_manifest(directory, _manifest(
        "relight", encoding=_encoding_meta(),
        inputs=[args.params, args.net], outputs=outputs,
    ))
    return 0


def _parse_pixel(text: str, flag: str):
    xy = _parse_vec(text, 2, flag)
    x, y = int(round(xy[0])), int(round(xy[1]))
    if x < 0 or y < 0:
        raise ValueError(f"{flag} pixel coordinates must be non-negative")
    return x, y


def _parse_material(spec_text: str, lenient: bool, material_normal):
    """Build a sphere material from its command line form.

    ggx:DIR:X,Y takes the analytic pixel (column X, row Y) of a map
    directory; neural:PARAMS.npm:NET.nbrf:X,Y takes a fitted texel.
    Returns (material, input paths).
    """
    parts = spec_text.split(":")
    if parts[0] == "ggx":
        if len(parts) != 3:
            raise ValueError("--material ggx form is ggx:DIR:X,Y")
        directory, pixel = parts[1], parts[2]
        x, y = _parse_pixel(pixel, "--material")
        maps = maps_io.load_svbrdf_maps(directory, strict=not lenient)
        if not (y < maps.height and x < maps.width):
            raise ValueError(
                f"pixel ({x},{y}) outside {maps.width}x{maps.height}"
            )
        material = GgxSample(
            diffuse_rgb=maps.diffuse[y, x],
            specular_rgb=maps.specular[y, x],
            normal=maps.normal[y, x],
            alpha=float(decode_alpha(maps.roughness[y, x])),
        )
        return material, [directory]
    if parts[0] == "neural":
        if len(parts) != 4:
            raise ValueError(
                "--material neural form is neural:PARAMS.npm:NET.nbrf:X,Y"
            )
        params_path, net_path, pixel = parts[1], parts[2], parts[3]
        x, y = _parse_pixel(pixel, "--material")
        param_map = containers.load_param_map(params_path)
        nets = containers.load_networks(net_path)
        if "renderer" not in nets or "nd_enc" not in nets:
            raise ValueError(
                "network file must hold renderer and nd_enc sections"
            )
        if not (y < param_map.height and x < param_map.width):
            raise ValueError(
                f"pixel ({x},{y}) outside {param_map.width}x{param_map.height}"
            )
        material = NeuralMaterialPixel(
            params=param_map.values[y, x],
            normal=material_normal,
            renderer=nets["renderer"],
            nd_enc=nets["nd_enc"],
        )
        return material, [params_path, net_path]
    raise ValueError("--material must start with 'ggx:' or 'neural:'")


def _cmd_sphere_render(args) -> int:
    material_normal = _parse_vec(args.material_normal, 3, "--material-normal")
    material, inputs = _parse_material(args.material, args.lenient,
                                       material_normal)
    scene = SphereScene(
        light=PointSource(_parse_vec(args.light, 3, "--light"),
                          _parse_vec(args.intensity, 3, "--intensity")),
        material=material,
        view_direction=_parse_vec(args.view_dir, 3, "--view-dir"),
        resolution=args.res,
    )
    image = render_sphere(scene)
    directory = _out_dir(args.out)
    pfm.write_pfm(args.out, image)
    outputs = [args.out]
    if args.display:
        _write_display(args.display, image)
        outputs.append(args.display)
    write_run_manifest(directory, _manifest(
        "sphere-render", inputs=inputs, outputs=outputs,
    ))
    return 0


def _cmd_gradcheck(args) -> int:
    gen = np.random.Generator(np.random.PCG64(args.seed))
    failed = False
    if args.which in ("mlp", "all"):
        for name, net in (("renderer", make_renderer_net(gen)),
                          ("nd_enc", make_nd_enc_net(gen))):
            err = gradcheck.gradcheck_mlp(net, batch=4, gen=gen)
            ok = err < 1e-4
            failed |= not ok
            print(f"gradcheck {name}: max rel err {err:.3e} "
                  f"[{'ok' if ok else 'FAIL'}]")
    if args.which in ("unet", "all"):
        unet = make_unet(gen, UNetSpec(base_width=4))
        err = gradcheck.gradcheck_unet(unet, 16, 16, gen)
        ok = err < 1e-3
        failed |= not ok
        print(f"gradcheck unet: max rel err {err:.3e} "
              f"[{'ok' if ok else 'FAIL'}]")
    return 1 if failed else 0


def _cmd_selftest(args) -> int:
    """Fast end-to-end smoke: render, file roundtrips, a tiny fit, and a
    sphere image, all in a temp directory."""
    with tempfile.TemporaryDirectory() as tmp:
        maps = SvbrdfMaps.uniform(
            16, 16, diffuse=(0.4, 0.4, 0.4), specular=(0.04, 0.04, 0.04),
            roughness=0.5,
        )
        image = colocated_input_render(maps)
        pfm_path = os.path.join(tmp, "photo.pfm")
        pfm.write_pfm(pfm_path, image)
        back = pfm.read_pfm(pfm_path)
        if not np.array_equal(back, image.astype(np.float32)):
            print("selftest FAIL: PFM roundtrip")
            return 1

        fit_config = FitConfig(iterations=30, epoch_iters=10,
                               exemplar_count=2, seed=7)
        rng = RngStream(7)
        configs = sampling.eval_configs("reflect", 2, rng)
        targets = []
        for cfg in configs:
            job = RenderJob(
                maps=maps, light=PointSource(cfg.light_position),
                view_position=cfg.view_position,
            )
            targets.append((render_image(job), cfg))
        result = fit(targets, image, fit_config)
        if not np.all(np.isfinite(result.loss_trace)):
            print("selftest FAIL: non-finite fit loss")
            return 1

        weights_path = os.path.join(tmp, "networks.nbrf")
        containers.save_networks(weights_path, renderer=result.renderer,
                                 nd_enc=result.nd_enc)
        nets = containers.load_networks(weights_path)
        params_path = os.path.join(tmp, "material.npm")
        containers.save_param_map(params_path, result.param_map)
        loaded = containers.load_param_map(params_path)
        if loaded.values.shape != result.param_map.values.shape:
            print("selftest FAIL: NPM roundtrip")
            return 1

        scene = SphereScene(
            light=PointSource(np.array([1.0, 1.0, 2.0])),
            material=NeuralMaterialPixel(
                params=loaded.values[8, 8],
                normal=np.array([0.0, 0.0, 1.0]),
                renderer=nets["renderer"],
                nd_enc=nets["nd_enc"],
            ),
            resolution=32,
        )
        sphere_img = render_sphere(scene)
        if not np.all(np.isfinite(sphere_img)):
            print("selftest FAIL: sphere render")
            return 1
    print("selftest ok")
    return 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svbrdf-forge",
        description="Desk-scale neural appearance pipeline: render GGX map "
                    "stacks, fit per-pixel neural materials, and re-render "
                    "them under novel light and view.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render an SVBRDF map stack to PFM")
    p.add_argument("--maps", required=True,
                   help="directory holding diffuse/specular/normal/roughness "
                        "PNGs")
    p.add_argument("--light", required=True, metavar="X,Y,Z")
    p.add_argument("--view", default=f"0,0,{D_VIEW}", metavar="X,Y,Z")
    p.add_argument("--intensity", default="1,1,1", metavar="R,G,B")
    p.add_argument("--falloff", action="store_true",
                   help="apply inverse-square distance falloff")
    p.add_argument("--ldr-clamp", action="store_true",
                   help="clamp the output to the LDR white point")
    p.add_argument("--white-point", type=float, default=1.0)
    p.add_argument("--lenient", action="store_true",
                   help="renormalize out-of-hemisphere normals instead of "
                        "rejecting the map")
    p.add_argument("--out", required=True, help="output PFM path")
    p.add_argument("--display", help="optional tone-mapped PNG path")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("sample-exemplars",
                       help="sample light/view configurations to JSON, "
                            "optionally rendering their target images")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=8)
    p.add_argument("--kind", choices=sampling.EVAL_KINDS, default="reflect")
    p.add_argument("--out", required=True,
                   help=f"output JSON path (name it {EXEMPLARS_JSON} to make "
                        "the directory a fit target set)")
    p.add_argument("--render-maps", metavar="DIR",
                   help="also render exemplar_NNN.pfm targets from this map "
                        "directory")
    p.add_argument("--falloff", action="store_true")
    p.add_argument("--shadow-band", action="store_true",
                   help="multiply a light-dependent shadow band into the "
                        "rendered targets")
    p.add_argument("--ldr-clamp", action="store_true",
                   help="clamp rendered targets to the LDR white point")
    p.add_argument("--white-point", type=float, default=1.0)
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=_cmd_sample_exemplars)

    p = sub.add_parser("estimate",
                       help="one-shot latent estimate from a single photo")
    p.add_argument("--input", required=True, help="linear HDR PFM photo")
    p.add_argument("--net", required=True, help="NBRF with a unet section")
    p.add_argument("--light", default=f"0,0,{D_VIEW}", metavar="X,Y,Z")
    p.add_argument("--view", default=f"0,0,{D_VIEW}", metavar="X,Y,Z")
    p.add_argument("--out", required=True, help="output NPM path")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("fit", help="fit a neural material to exemplar targets")
    p.add_argument("--input", help="co-located input photo PFM (trains as an "
                                   "extra exemplar)")
    p.add_argument("--targets", required=True,
                   help="directory of exemplars.json + exemplar_NNN.pfm")
    p.add_argument("--config", help="fit configuration JSON path")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--iterations", type=int,
                   help="override the config iteration budget")
    p.add_argument("--out-params", required=True, help="output NPM path")
    p.add_argument("--out-net", required=True, help="output NBRF path")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("relight",
                       help="re-render a fitted material under a new light")
    p.add_argument("--params", required=True, help="NPM latent map")
    p.add_argument("--net", required=True, help="NBRF weights")
    p.add_argument("--light", required=True, metavar="X,Y,Z")
    p.add_argument("--view", default=f"0,0,{D_VIEW}", metavar="X,Y,Z")
    p.add_argument("--out", required=True, help="output PFM path")
    p.add_argument("--display", help="optional tone-mapped PNG path")
    p.set_defaults(func=_cmd_relight)

    p = sub.add_parser("sphere-render",
                       help="re-render one material pixel on a sphere")
    p.add_argument("--material", required=True,
                   metavar="ggx:DIR:X,Y | neural:PARAMS.npm:NET.nbrf:X,Y")
    p.add_argument("--light", required=True, metavar="LX,LY,LZ")
    p.add_argument("--intensity", default="1,1,1", metavar="R,G,B")
    p.add_argument("--view-dir", default="0,0,1", metavar="X,Y,Z")
    p.add_argument("--material-normal", default="0,0,1", metavar="X,Y,Z",
                   help="encoded shading normal for a neural material")
    p.add_argument("--res", type=int, default=128)
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--display")
    p.set_defaults(func=_cmd_sphere_render)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--which", choices=("mlp", "unet", "all"), default="all")
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("selftest", help="fast end-to-end smoke test")
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
