"""Thin command-line client for the augmentation service.

Every subcommand builds a request model and dispatches it: against a remote
server when ``--server`` (or FREQAUG_SERVER) is set, otherwise straight into
the in-process service handlers. All output is the JSON of the response
model. Exit codes: 0 success, 1 usage/config error, 2 data error, 3 I/O error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from .errors import ConfigError, DataError, FreqAugError, exit_code_for
from .service import app as service
from .service import schemas

# the CLI contract reserves exit 2 for data errors; click's default usage
# exit code collides with it
click.exceptions.UsageError.exit_code = 1

_KIND_EXIT = {"config": 1, "data": 2, "io": 3}


def _error_kind(exc: BaseException) -> str:
    if isinstance(exc, ConfigError):
        return "config"
    if isinstance(exc, DataError):
        return "data"
    if isinstance(exc, OSError):
        return "io"
    return "config"


def _fail(kind: str, message: str):
    click.echo(json.dumps({"error": {"kind": kind, "message": message}}), err=True)
    sys.exit(_KIND_EXIT.get(kind, 1))


def _dispatch(ctx, route: str, handler, request):
    server = ctx.obj.get("server")
    if server:
        try:
            resp = httpx.post(
                server.rstrip("/") + route,
                json=request.model_dump(mode="json"),
                timeout=None,
            )
        except httpx.HTTPError as exc:
            _fail("io", f"cannot reach {server}: {exc}")
        payload = resp.json()
        if resp.status_code != 200:
            err = payload.get("error", {})
            _fail(err.get("kind", "config"), err.get("message", resp.text))
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
        return payload
    try:
        response = handler(request)
    except (FreqAugError, OSError) as exc:
        _fail(_error_kind(exc), str(exc))
    click.echo(response.model_dump_json(indent=2))
    return response.model_dump(mode="json")


def _parse_size(value: str):
    if value.lower() == "native":
        return None
    try:
        w, h = value.lower().split("x")
        return [int(w), int(h)]
    except ValueError:
        raise click.UsageError(f"--size expects WxH or 'native', got {value!r}")


def _parse_int_list(value: str):
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.UsageError(f"expected comma-separated integers, got {value!r}")


def _parse_float_list(value: str):
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.UsageError(f"expected comma-separated numbers, got {value!r}")


@click.group()
@click.option("--server", envvar="FREQAUG_SERVER", default=None, metavar="URL",
              help="Send commands to a running service instead of in-process.")
@click.pass_context
def main(ctx, server):
    """Frequency-domain data augmentation for segmentation datasets."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.option("--input", "input_dir", metavar="DIR", help="Source image directory.")
@click.option("--labels", "label_dir", metavar="DIR", default=None, help="Label directory.")
@click.option("--out", "out_dir", metavar="DIR", help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--k", type=int, default=10, show_default=True,
              help="Augmented views per source image per epoch.")
@click.option("--epochs", type=int, default=1, show_default=True)
@click.option("--d0-min", type=float, default=0.005, show_default=True,
              help="Lower cutoff bound as a fraction of the spectrum radius.")
@click.option("--d0-max", type=float, default=0.04, show_default=True)
@click.option("--orders", default="1,2,3", show_default=True,
              help="Butterworth order choices, comma separated.")
@click.option("--filter-kind", type=click.Choice(["butterworth", "ideal"]),
              default="butterworth", show_default=True)
@click.option("--channel-wise/--shared-filter", default=True,
              help="Independent filter parameters per channel, or one shared filter.")
@click.option("--mask", type=click.Choice(["continuous", "patch", "grid"]),
              default="continuous", show_default=True)
@click.option("--grid-cell", type=int, default=None, help="Grid mask cell size in pixels.")
@click.option("--size", default="512x512", show_default=True,
              help="Target WxH (bilinear images, nearest labels), or 'native'.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--config", "config_file", type=click.Path(), default=None,
              help="JSON file with request fields; explicit flags override it.")
@click.pass_context
def augment(ctx, **params):
    """Run the full augmentation pipeline over a dataset directory."""
    config_file = params.pop("config_file")
    values = {}
    if config_file:
        try:
            values.update(json.loads(Path(config_file).read_text()))
        except FileNotFoundError:
            _fail("io", f"config file {config_file} not found")
        except json.JSONDecodeError as exc:
            _fail("config", f"config file {config_file} is not valid JSON: {exc}")
    for name, value in params.items():
        if ctx.get_parameter_source(name).name != "DEFAULT" or name not in values:
            values[name] = value
    if isinstance(values.get("orders"), str):
        values["orders"] = _parse_int_list(values["orders"])
    if isinstance(values.get("size"), str):
        values["size"] = _parse_size(values["size"])
    if not values.get("input_dir") or not values.get("out_dir"):
        raise click.UsageError("--input and --out are required (flags or config file)")
    try:
        request = schemas.AugmentRequest(**values)
    except ValueError as exc:
        _fail("config", str(exc))
    _dispatch(ctx, "/augment", service.handle_augment, request)


@main.command("filter")
@click.option("--image", required=True, metavar="FILE")
@click.option("--out", required=True, metavar="FILE")
@click.option("--kind", type=click.Choice(["butterworth", "ideal"]), default="butterworth",
              show_default=True)
@click.option("--d0", default=None, metavar="LIST",
              help="Explicit per-channel cutoff fractions (one value broadcasts).")
@click.option("--orders", default=None, metavar="LIST", help="Explicit per-channel orders.")
@click.option("--seed", type=int, default=None, help="Sample parameters from this seed instead.")
@click.option("--d0-min", type=float, default=0.005, show_default=True)
@click.option("--d0-max", type=float, default=0.04, show_default=True)
@click.option("--order-choices", default="1,2,3", show_default=True)
@click.option("--channel-wise/--shared-filter", default=True)
@click.pass_context
def filter_cmd(ctx, image, out, kind, d0, orders, seed, d0_min, d0_max, order_choices, channel_wise):
    """High-pass filter a single image with explicit or sampled parameters."""
    request = schemas.FilterRequest(
        image=image,
        out=out,
        kind=kind,
        d0=_parse_float_list(d0) if d0 else None,
        orders=_parse_int_list(orders) if orders else None,
        seed=seed,
        d0_min=d0_min,
        d0_max=d0_max,
        order_choices=_parse_int_list(order_choices),
        channel_wise=channel_wise,
    )
    _dispatch(ctx, "/filter", service.handle_filter, request)


@main.command()
@click.option("--image", required=True, metavar="FILE", help="Source image to filter twice and blend.")
@click.option("--out", required=True, metavar="FILE")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mask", type=click.Choice(["continuous", "patch", "grid"]), default="continuous",
              show_default=True)
@click.option("--grid-cell", type=int, default=None)
@click.option("--d0-min", type=float, default=0.005, show_default=True)
@click.option("--d0-max", type=float, default=0.04, show_default=True)
@click.option("--orders", default="1,2,3", show_default=True)
@click.option("--filter-kind", type=click.Choice(["butterworth", "ideal"]), default="butterworth",
              show_default=True)
@click.option("--channel-wise/--shared-filter", default=True)
@click.pass_context
def blend(ctx, image, out, seed, mask, grid_cell, d0_min, d0_max, orders, filter_kind, channel_wise):
    """Blend two freshly filtered variants of one image under a sampled mask."""
    request = schemas.BlendRequest(
        image=image,
        out=out,
        seed=seed,
        mask=mask,
        grid_cell=grid_cell,
        d0_min=d0_min,
        d0_max=d0_max,
        orders=_parse_int_list(orders),
        filter_kind=filter_kind,
        channel_wise=channel_wise,
    )
    _dispatch(ctx, "/blend", service.handle_blend, request)


@main.command()
@click.option("--image", required=True, metavar="FILE")
@click.option("--out", required=True, metavar="FILE", help="Output .npy saliency tensor.")
@click.option("--radius", type=int, default=None, help="Kernel radius; default follows the size rule.")
@click.option("--sigma", type=float, default=None, help="Kernel sigma; default radius/3.")
@click.option("--preview-out", default=None, metavar="FILE",
              help="Optional [0,1]-mapped preview PNG.")
@click.pass_context
def saliency(ctx, image, out, radius, sigma, preview_out):
    """Extract the structure-saliency pretext target of an image."""
    request = schemas.SaliencyRequest(
        image=image, out=out, radius=radius, sigma=sigma, preview_out=preview_out
    )
    _dispatch(ctx, "/saliency", service.handle_saliency, request)


@main.command()
@click.option("--pred-saliency", default=None, metavar="NPY")
@click.option("--target-saliency", default=None, metavar="NPY")
@click.option("--pred-seg", default=None, metavar="NPY")
@click.option("--labels", default=None, metavar="NPY")
@click.option("--pred-mask", default=None, metavar="FILE", help=".npy or .png binary mask.")
@click.option("--true-mask", default=None, metavar="FILE")
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.pass_context
def losses(ctx, pred_saliency, target_saliency, pred_seg, labels, pred_mask, true_mask, alpha):
    """Evaluate loss values and overlap metrics on tensor files."""
    request = schemas.LossesRequest(
        pred_saliency=pred_saliency,
        target_saliency=target_saliency,
        pred_seg=pred_seg,
        labels=labels,
        pred_mask=pred_mask,
        true_mask=true_mask,
        alpha=alpha,
    )
    _dispatch(ctx, "/losses", service.handle_losses, request)


@main.command()
@click.option("--manifest", required=True, metavar="FILE")
@click.option("--n", type=int, default=4, show_default=True)
@click.option("--out", required=True, metavar="FILE")
@click.pass_context
def preview(ctx, manifest, n, out):
    """Render a montage (original, both filtered, mask, blend, saliency)."""
    request = schemas.PreviewRequest(manifest=manifest, n=n, out=out)
    _dispatch(ctx, "/preview", service.handle_preview, request)


@main.command()
@click.option("--n-images", type=int, default=20, show_default=True)
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--size", default="512x512", show_default=True)
@click.option("--repetitions", type=int, default=3, show_default=True)
@click.option("--workers", type=int, default=4, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def bench(ctx, n_images, k, size, repetitions, workers, seed):
    """Measure augmentation throughput, single- versus multi-worker."""
    parsed = _parse_size(size)
    if parsed is None:
        raise click.UsageError("bench needs an explicit WxH size")
    request = schemas.BenchRequest(
        n_images=n_images, k=k, size=parsed, repetitions=repetitions, workers=workers, seed=seed
    )
    _dispatch(ctx, "/bench", service.handle_bench, request)


@main.command()
@click.option("--manifest", required=True, metavar="FILE")
@click.option("--index", type=int, default=None, help="Manifest line number (0-based).")
@click.option("--parent", default=None, help="Select by parent stem instead.")
@click.option("--epoch", type=int, default=0, show_default=True)
@click.option("--view", type=int, default=0, show_default=True)
@click.pass_context
def replay(ctx, manifest, index, parent, epoch, view):
    """Recompute one manifest record and verify its output hash."""
    request = schemas.ReplayRequest(
        manifest=manifest, index=index, parent=parent, epoch=epoch, view=view
    )
    payload = _dispatch(ctx, "/replay", service.handle_replay, request)
    if not payload.get("match"):
        sys.exit(2)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the augmentation service."""
    import uvicorn

    uvicorn.run(service.create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
