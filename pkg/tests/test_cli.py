import json
import socket
import threading
import time
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from freqaug import imgio
from freqaug.cli import main

from conftest import synthetic_photo
from test_pipeline import write_fixture_dataset


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    return result


class TestSingleImageCommands:
    def test_filter_explicit_params(self, runner, tmp_path):
        src = tmp_path / "in.png"
        imgio.save_png(src, synthetic_photo(1, 32, 32))
        out = tmp_path / "out.png"
        result = invoke(
            runner,
            ["filter", "--image", str(src), "--out", str(out), "--d0", "0.01,0.02,0.03",
             "--orders", "2"],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert len(body["spec"]["per_channel"]) == 3
        assert out.exists()

    def test_filter_missing_image_exits_2(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["filter", "--image", str(tmp_path / "nope.png"), "--out", str(tmp_path / "o.png"),
             "--seed", "1"],
        )
        assert result.exit_code == 2

    def test_filter_bad_range_exits_1(self, runner, tmp_path):
        src = tmp_path / "in.png"
        imgio.save_png(src, synthetic_photo(1, 16, 16))
        result = runner.invoke(
            main,
            ["filter", "--image", str(src), "--out", str(tmp_path / "o.png"), "--d0", "0.9"],
        )
        assert result.exit_code == 1

    def test_missing_required_flag_exits_1(self, runner):
        result = runner.invoke(main, ["filter", "--out", "x.png"])
        assert result.exit_code == 1

    def test_blend_and_saliency(self, runner, tmp_path):
        src = tmp_path / "in.png"
        imgio.save_png(src, synthetic_photo(2, 32, 32))
        blend_out = tmp_path / "blend.png"
        result = invoke(
            runner, ["blend", "--image", str(src), "--out", str(blend_out), "--seed", "4"]
        )
        assert result.exit_code == 0, result.output
        assert blend_out.exists()

        psi_out = tmp_path / "psi.npy"
        result = invoke(runner, ["saliency", "--image", str(src), "--out", str(psi_out)])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["radius"] == 1
        assert np.load(psi_out).shape == (32, 32, 3)


class TestAugmentFlow:
    def test_augment_then_replay(self, runner, tmp_path):
        img_dir, lbl_dir = write_fixture_dataset(tmp_path, n=2, size=32)
        out_dir = tmp_path / "run"
        result = invoke(
            runner,
            ["augment", "--input", str(img_dir), "--labels", str(lbl_dir), "--out", str(out_dir),
             "--seed", "11", "--k", "2", "--size", "32x32"],
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["records"] == 4

        result = invoke(
            runner, ["replay", "--manifest", body["manifest"], "--index", "3"]
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["match"] is True

    def test_augment_missing_input_exits_2(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["augment", "--input", str(tmp_path / "missing"), "--out", str(tmp_path / "o"),
             "--size", "16x16"],
        )
        assert result.exit_code == 2

    def test_augment_requires_dirs(self, runner):
        result = runner.invoke(main, ["augment"])
        assert result.exit_code == 1

    def test_bad_size_flag_exits_1(self, runner, tmp_path):
        result = runner.invoke(
            main, ["augment", "--input", str(tmp_path), "--out", str(tmp_path), "--size", "huge"]
        )
        assert result.exit_code == 1

    def test_config_file_with_flag_override(self, runner, tmp_path):
        img_dir, _ = write_fixture_dataset(tmp_path, n=1, size=32, labels=False)
        config = {
            "input_dir": str(img_dir),
            "out_dir": str(tmp_path / "from_file"),
            "k": 1,
            "seed": 5,
            "size": [32, 32],
        }
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(config))
        override_out = tmp_path / "overridden"
        result = invoke(
            runner, ["augment", "--config", str(cfg_path), "--out", str(override_out), "--k", "2"]
        )
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["records"] == 2  # overridden k
        assert Path(body["manifest"]).parent == override_out

    def test_preview_command(self, runner, tmp_path):
        img_dir, _ = write_fixture_dataset(tmp_path, n=1, size=32, labels=False)
        out_dir = tmp_path / "run"
        invoke(
            runner,
            ["augment", "--input", str(img_dir), "--out", str(out_dir), "--k", "1",
             "--size", "32x32"],
        )
        result = invoke(
            runner,
            ["preview", "--manifest", str(out_dir / "manifest.jsonl"), "--n", "1",
             "--out", str(tmp_path / "m.png")],
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["rows"] == 1


class TestLossesCommand:
    def test_losses_on_tensor_files(self, runner, tmp_path):
        np.save(tmp_path / "t.npy", np.zeros((4, 4, 1), dtype=np.float32))
        np.save(tmp_path / "p.npy", np.full((2, 4, 4, 1), 0.25, dtype=np.float32))
        result = invoke(
            runner,
            ["losses", "--pred-saliency", str(tmp_path / "p.npy"),
             "--target-saliency", str(tmp_path / "t.npy")],
        )
        assert result.exit_code == 0, result.output
        assert abs(json.loads(result.output)["loss_self"] - 0.0625) < 1e-9

    def test_losses_without_inputs_exits_1(self, runner):
        result = runner.invoke(main, ["losses"])
        assert result.exit_code == 1


@pytest.fixture(scope="module")
def live_server():
    import uvicorn

    from freqaug.service import create_app

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    config = uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    for _ in range(200):
        if server.started:
            break
        time.sleep(0.05)
    else:
        pytest.fail("service did not start")
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


class TestRemoteDispatch:
    def test_remote_filter_matches_local(self, runner, tmp_path, live_server):
        src = tmp_path / "in.png"
        imgio.save_png(src, synthetic_photo(6, 32, 32))
        local = invoke(
            runner,
            ["filter", "--image", str(src), "--out", str(tmp_path / "local.png"), "--seed", "8"],
        )
        remote = invoke(
            runner,
            ["--server", live_server, "filter", "--image", str(src),
             "--out", str(tmp_path / "remote.png"), "--seed", "8"],
        )
        assert remote.exit_code == 0, remote.output
        assert json.loads(local.output)["sha256"] == json.loads(remote.output)["sha256"]

    def test_remote_error_mapping(self, runner, tmp_path, live_server):
        result = runner.invoke(
            main,
            ["--server", live_server, "filter", "--image", str(tmp_path / "none.png"),
             "--out", str(tmp_path / "o.png"), "--seed", "1"],
        )
        assert result.exit_code == 2

    def test_unreachable_server_exits_3(self, runner, tmp_path):
        src = tmp_path / "in.png"
        imgio.save_png(src, synthetic_photo(6, 16, 16))
        result = runner.invoke(
            main,
            ["--server", "http://127.0.0.1:1", "filter", "--image", str(src),
             "--out", str(tmp_path / "o.png"), "--seed", "1"],
        )
        assert result.exit_code == 3
