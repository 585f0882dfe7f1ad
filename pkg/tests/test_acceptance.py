"""Acceptance suite: one test per release criterion, each printing a PASS/FAIL
line (run with ``pytest -s tests/test_acceptance.py`` to see them). Tolerances
are pinned here and nowhere else."""

import itertools
import json
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner
from scipy import ndimage

from freqaug import blending, filters, fourier, imgio, losses, pipeline, saliency
from freqaug.cli import main as cli_main

from conftest import fundus_like
from oracles import conv2_dense_reflect, dft2_direct, idft2_direct, total_variation


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"ACCEPTANCE {name}: FAIL", flush=True)
        raise
    print(f"ACCEPTANCE {name}: PASS", flush=True)


def test_dft_oracle_suite():
    with criterion("dft-oracle-suite"):
        start = time.perf_counter()
        rng = np.random.default_rng(2024)
        for m in (2, 3, 4, 8):
            for n in (2, 3, 4, 8):
                img = rng.random((m, n))
                spec = fourier.dft2(img)
                assert np.max(np.abs(spec.data - np.fft.fftshift(dft2_direct(img)))) < 1e-9
                natural = fourier.unshift_center(spec)
                back = idft2_direct(natural.data)
                assert np.max(np.abs(fourier.idft2(spec) - back.real)) < 1e-9
        img = rng.random((64, 64, 3))
        assert np.max(np.abs(fourier.idft2(fourier.dft2(img)) - img)) < 1e-9
        x16 = rng.random((16, 16))
        lhs = np.sum(x16**2)
        rhs = np.sum(np.abs(fourier.dft2(x16).data) ** 2) / x16.size
        assert abs(lhs - rhs) / lhs < 1e-9
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"oracle suite took {elapsed:.1f}s"


def test_butterworth_analytic_suite():
    with criterion("butterworth-analytic-suite"):
        for n in (1, 2, 3):
            assert abs(filters.butterworth_response(3.3, 3.3, n) - 0.5) <= 1e-12
        d0 = 1.7
        assert filters.butterworth_response(d0 * 0.5, d0, 1) == 0.2
        grid = d0 * np.logspace(-2, 1, 1000)
        gains = {n: filters.butterworth_response(grid, d0, n) for n in (1, 2, 3)}
        for n in (1, 2, 3):
            assert np.all(np.diff(gains[n]) > 0)
        below = grid < d0 * 0.999
        above = grid > d0 * 1.001
        for lo, hi in ((1, 2), (2, 3)):
            assert np.all(gains[hi][below] < gains[lo][below])
            assert np.all(gains[hi][above] > gains[lo][above])


def test_filtering_suite():
    with criterion("filtering-suite"):
        const = np.full((16, 16, 3), 0.5)
        spec = filters.FilterSpec(
            "butterworth", tuple(filters.ButterworthParams(0.02, 2) for _ in range(3))
        )
        out = filters.apply_filter(const, spec, "c")
        prenorm_energy = sum(
            max(abs(lo), abs(hi)) ** 2 for lo, hi in zip(out.prenorm_min, out.prenorm_max)
        )
        assert prenorm_energy < 1e-6 * float(np.sum(const**2))

        rng = np.random.default_rng(31)
        img = rng.random((32, 32, 3))
        mixed = filters.FilterSpec(
            "butterworth",
            (
                filters.ButterworthParams(0.01, 1),
                filters.ButterworthParams(0.025, 2),
                filters.ButterworthParams(0.04, 3),
            ),
        )
        lib = filters.apply_filter(img, mixed, "p")
        dist = filters.distance_field(32, 32)
        r = filters.spectrum_radius(32, 32)
        for c, p in enumerate(mixed.per_channel):
            nat = dft2_direct(img[:, :, c])
            gain = filters.butterworth_response(dist, p.d0_fraction * r, p.order_n)
            raw = idft2_direct(np.fft.ifftshift(np.fft.fftshift(nat) * gain)).real
            expected = (raw - raw.min()) / (raw.max() - raw.min())
            assert np.max(np.abs(lib.data[:, :, c] - expected)) < 1e-9

        square = np.zeros((128, 128))
        square[48:80, 48:80] = 1.0
        tv_ideal = total_variation(
            filters.apply_filter(square, filters.FilterSpec("ideal", (filters.IdealParams(0.04),)), "s").data
        )
        tv_butter = total_variation(
            filters.apply_filter(
                square, filters.FilterSpec("butterworth", (filters.ButterworthParams(0.04, 2),)), "s"
            ).data
        )
        assert tv_ideal > tv_butter, f"TV ideal {tv_ideal:.2f} vs butterworth {tv_butter:.2f}"


def test_blend_mask_suite():
    with criterion("blend-mask-suite"):
        rng = np.random.default_rng(8)
        spec = filters.FilterSpec("butterworth", (filters.ButterworthParams(0.02, 1),))

        def sample(data):
            c = data.shape[2]
            return filters.FilteredSample(
                data, "p", spec, (0.0,) * c, (1.0,) * c, (False,) * c, 0.0
            )

        x_m = sample(rng.random((6, 6, 3)))
        x_n = sample(rng.random((6, 6, 3)))
        ones = blending.BlendMask(np.ones((6, 6)), "continuous", {})
        zeros = blending.BlendMask(np.zeros((6, 6)), "continuous", {})
        assert np.array_equal(blending.blend(x_m, x_n, ones).data, x_m.data)
        assert np.array_equal(blending.blend(x_m, x_n, zeros).data, x_n.data)
        assert np.array_equal(blending.blend(x_m, x_m, ones).data, x_m.data)

        mask = blending.continuous_mask(6, 6, (2, 3))
        flipped = blending.BlendMask(1.0 - mask.data, mask.kind, mask.params)
        forward = blending.blend(x_m, x_n, mask).data
        backward = blending.blend(x_n, x_m, flipped).data
        assert np.max(np.abs(forward - backward)) <= 1e-12

        centered = blending.continuous_mask(5, 5, (2, 2))
        assert centered.data[2, 2] == 0.0
        for i in (0, 4):
            for j in (0, 4):
                assert abs(centered.data[i, j] - 1.0) <= 1e-12

        corner = blending.continuous_mask(3, 3, (0, 0))
        assert abs(corner.data[2, 2] - 1.0) <= 1e-12
        assert abs(corner.data[2, 0] - 2 / np.sqrt(8)) <= 1e-12


def test_saliency_suite():
    with criterion("saliency-suite"):
        rng = np.random.default_rng(12)
        img = rng.random((16, 16, 3))
        kernel = saliency.GaussianKernel(2, 0.9)
        psi = saliency.structure_saliency(img, kernel)
        blur = saliency.gaussian_blur(img, kernel)
        assert np.max(np.abs((psi + blur) - img)) <= 1e-12
        assert np.max(np.abs(saliency.structure_saliency(np.full((16, 16, 3), 0.6), kernel))) <= 1e-12
        oracle = conv2_dense_reflect(img, kernel.dense_2d())
        assert np.max(np.abs(blur - oracle)) <= 1e-12


def test_loss_suite():
    with criterion("loss-suite"):
        target = np.zeros((4, 4))
        assert losses.loss_self(np.stack([target, target]), target) == 0.0
        assert abs(losses.loss_self(np.full((3, 4, 4), 0.5), target) - 0.25) <= 1e-15
        t = np.array([[0.0, 1.0], [0.5, 0.25]])
        preds = np.stack([t + np.array([[0.1, -0.1], [0.2, 0.0]]), t + np.array([[0.0, 0.3], [-0.2, 0.1]])])
        assert abs(losses.loss_self(preds, t) - 0.025) <= 1e-15

        labels = np.zeros((2, 2, 2))
        labels[..., 0] = 1.0
        assert losses.loss_seg(np.stack([labels]), labels) < 1e-12
        assert abs(losses.loss_seg(np.full((1, 2, 2, 2), 0.5), labels) - 0.6931) < 1e-4
        two_px_labels = np.zeros((1, 2, 2))
        two_px_labels[0, 0, 0] = 1.0
        two_px_labels[0, 1, 1] = 1.0
        mixed = np.array([[[[0.9, 0.1], [0.2, 0.8]]]])
        assert abs(losses.loss_seg(mixed, two_px_labels) - 0.16425) < 1e-4

        assert losses.loss_total(0.7, 9.0, alpha=0.0) == 0.7
        assert losses.loss_total(0.0, 0.25, alpha=1.0) == 0.25
        assert losses.loss_total(0.5, 0.25, alpha=2.0) == 1.0

        m = np.zeros((4, 4), dtype=bool)
        m[:2] = True
        assert losses.dice_and_iou(m, m) == (1.0, 1.0)
        assert losses.dice_and_iou(m, ~m) == (0.0, 0.0)
        a = np.zeros(8, dtype=bool)
        b = np.zeros(8, dtype=bool)
        a[:4] = True
        b[2:6] = True
        dice, iou = losses.dice_and_iou(a, b)
        assert abs(dice - 0.5) <= 1e-15 and abs(iou - 1 / 3) <= 1e-15

        gen = np.random.default_rng(77)
        for _ in range(1000):
            pa = gen.random((5, 5)) > gen.uniform(0.2, 0.9)
            pb = gen.random((5, 5)) > gen.uniform(0.2, 0.9)
            d, i = losses.dice_and_iou(pa, pb)
            assert d >= i


@pytest.fixture(scope="module")
def fixture_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("fixture4")
    img_dir = root / "images"
    img_dir.mkdir()
    for i in range(4):
        imgio.save_png(img_dir / f"f{i}.png", fundus_like(1000 + i, 256))
    return img_dir


def test_determinism(fixture_dataset, tmp_path):
    with criterion("determinism"):
        runner = CliRunner()
        manifests = {}
        hashes = {}
        for workers in (1, 4):
            for attempt in (0, 1):
                out = tmp_path / f"run_w{workers}_a{attempt}"
                result = runner.invoke(
                    cli_main,
                    ["augment", "--input", str(fixture_dataset), "--out", str(out),
                     "--seed", "42", "--k", "3", "--size", "128x128",
                     "--workers", str(workers)],
                    catch_exceptions=False,
                )
                assert result.exit_code == 0, result.output
                manifests[(workers, attempt)] = (out / "manifest.jsonl").read_bytes()
                hashes[(workers, attempt)] = sorted(
                    (p.name, imgio.sha256_file(p)) for p in (out / "images").iterdir()
                )
        baseline = manifests[(1, 0)]
        assert all(m == baseline for m in manifests.values())
        base_hashes = hashes[(1, 0)]
        assert all(h == base_hashes for h in hashes.values())

        manifest_path = tmp_path / "run_w1_a0" / "manifest.jsonl"
        n_records = len(pipeline.read_manifest(manifest_path))
        assert n_records == 12
        for index in range(n_records):
            result = runner.invoke(
                cli_main,
                ["replay", "--manifest", str(manifest_path), "--index", str(index)],
                catch_exceptions=False,
            )
            assert result.exit_code == 0, result.output
            assert json.loads(result.output)["match"] is True


def test_diversity_witness(fixture_dataset, tmp_path):
    with criterion("diversity-witness"):
        runner = CliRunner()
        out = tmp_path / "diversity_run"
        result = runner.invoke(
            cli_main,
            ["augment", "--input", str(fixture_dataset), "--out", str(out),
             "--seed", "7", "--k", "10", "--size", "256x256"],
            catch_exceptions=False,
        )
        assert result.exit_code == 0, result.output
        records = pipeline.read_manifest(out / "manifest.jsonl")

        def mean_pairwise(views):
            return float(
                np.mean([np.linalg.norm(a - b) for a, b in itertools.combinations(views, 2)])
            )

        for stem in sorted({r["parent"] for r in records}):
            freq_views = [
                imgio.load_image(out / r["image"]) for r in records if r["parent"] == stem
            ]
            assert len(freq_views) == 10
            source = imgio.load_image(fixture_dataset / f"{stem}.png")
            geo_views = [np.rot90(source, k) for k in range(4)]
            geo_views += [np.rot90(source[:, ::-1], k) for k in range(4)]
            for ang in (45, -45):
                geo_views.append(
                    np.clip(
                        ndimage.rotate(source, ang, axes=(1, 0), reshape=False, order=1, mode="reflect"),
                        0, 1,
                    )
                )
            freq_dist = mean_pairwise(freq_views)
            geo_dist = mean_pairwise(geo_views)
            print(f"  {stem}: frequency-blend {freq_dist:.2f} vs geometric {geo_dist:.2f}")
            assert freq_dist > geo_dist


def test_benchmark_smoke():
    with criterion("benchmark-smoke"):
        runner = CliRunner()
        result = runner.invoke(
            cli_main,
            ["bench", "--n-images", "20", "--k", "10", "--size", "512x512",
             "--repetitions", "1", "--workers", "4"],
            catch_exceptions=False,
        )
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        for section in ("single", "multi"):
            stats = report[section]
            assert stats["images_per_sec"] > 0
            assert stats["views_per_sec"] > 0
            assert stats["p50"] <= stats["p90"] <= stats["p100"]
        print(f"  single {report['single']['images_per_sec']} img/s, "
              f"multi {report['multi']['images_per_sec']} img/s, "
              f"scaling {report['scaling_factor']}")
        assert report["scaling_factor"] >= 0.95
