import json
import subprocess
import sys

import pytest

from previz import cli
from previz.skelio import dump_document

from skeleton_fixtures import dialogue_sequence


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo")
    assert cli.main(["demo", "--out", str(out)]) == 0
    return out


class TestDemoValidate:
    def test_validate_demo_exit_zero(self, demo_dir):
        assert cli.main(["validate", str(demo_dir / "project.json")]) == 0

    def test_validate_garbage_exit_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "junk.json"
        bad.write_text("{not json")
        assert cli.main(["validate", str(bad)]) == 1
        err = capsys.readouterr().err
        assert json.loads(err.strip())["error"]

    def test_console_script_wiring(self, demo_dir):
        result = subprocess.run(
            [sys.executable, "-m", "previz.cli", "validate", str(demo_dir / "project.json")],
            capture_output=True, text=True,
        )
        assert result.returncode == 0
        assert json.loads(result.stdout)["ok"] is True


class TestRender:
    def test_render_counts(self, demo_dir, tmp_path, capsys):
        out = tmp_path / "frames"
        assert cli.main(["render", str(demo_dir / "project.json"), "--clip", "c1",
                         "--fps", "16", "--size", "96x54", "--out", str(out),
                         "--plan-table"]) == 0
        body = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert body["frames"] == 32
        for channel in ("color", "depth", "id"):
            assert len(list(out.glob(f"{channel}_*.png"))) == 32
        assert (out / "frame_plan.txt").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["fps"] == 16 and manifest["width"] == 96

    def test_unknown_clip_fails(self, demo_dir, tmp_path):
        assert cli.main(["render", str(demo_dir / "project.json"), "--clip", "zz",
                         "--out", str(tmp_path / "x")]) == 1


class TestRestyle:
    def test_strict_closer_than_loose_in_report(self, demo_dir, tmp_path, capsys):
        out = tmp_path / "restyle"
        assert cli.main(["restyle", str(demo_dir / "project.json"), "--clip", "c1",
                         "--level", "strict", "--seed", "5", "--size", "128x72",
                         "--out", str(out)]) == 0
        body = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert body["distances"]["strict"] < body["distances"]["loose"]
        rows = (out / "restyle_report.csv").read_text().splitlines()
        assert rows[0].startswith("level,")
        assert len(rows) == 5
        assert (out / "restyle_report.png").exists()
        assert (out / "result.png").read_bytes() == (out / "restyled_strict.png").read_bytes()


class TestGenerate:
    def test_generate_outputs(self, demo_dir, tmp_path, capsys):
        out = tmp_path / "gen"
        assert cli.main(["generate", str(demo_dir / "project.json"), "--clip", "c1",
                         "--seed", "5", "--size", "96x54", "--out", str(out)]) == 0
        body = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert body["frames"] == 32
        assert (out / "clip.gif").read_bytes()[:6] in (b"GIF87a", b"GIF89a")
        assert len(list((out / "frames").glob("*.png"))) == 32


class TestRemoteBackend:
    def test_restyle_through_remote_gateway_matches_stub(self, demo_dir, tmp_path, capsys, monkeypatch):
        """The CLI must localize artifacts via fetch_result; poll records
        carry backend-side refs that are not resolvable locally."""
        from fastapi.testclient import TestClient

        from previz import cli as cli_mod
        from previz.assets import MemoryAssetStore
        from previz.gateway import StubGateway
        from previz.genwire import RemoteGateway, make_gen_app

        out_stub = tmp_path / "stub"
        assert cli.main(["restyle", str(demo_dir / "project.json"), "--clip", "c1",
                         "--level", "strict", "--seed", "5", "--size", "96x54",
                         "--out", str(out_stub)]) == 0
        stub_json = json.loads(capsys.readouterr().out.strip().splitlines()[-1])

        server_gw = StubGateway(MemoryAssetStore())
        client = TestClient(make_gen_app(server_gw), base_url="http://gen")
        monkeypatch.setattr(cli_mod, "_gateway",
                            lambda store: RemoteGateway("http://gen", store, client=client))

        out_remote = tmp_path / "remote"
        assert cli.main(["restyle", str(demo_dir / "project.json"), "--clip", "c1",
                         "--level", "strict", "--seed", "5", "--size", "96x54",
                         "--out", str(out_remote)]) == 0
        remote_json = json.loads(capsys.readouterr().out.strip().splitlines()[-1])

        assert remote_json["distances"] == stub_json["distances"]
        assert (out_remote / "result.png").read_bytes() == (out_stub / "result.png").read_bytes()


class TestRemix:
    def test_script_round_trip(self, tmp_path, capsys):
        (tmp_path / "in.skel").write_text(dump_document(dialogue_sequence(n_frames=8)))
        script = tmp_path / "script.txt"
        script.write_text(
            "load in.skel\n"
            "crop 0 0.25\n"
            "split\n"
            "transform 2 0.05 0.0 0.7\n"
            "recomposite 16 0.25\n"
            "save out.skel\n"
            "overlays poses 64 36\n"
        )
        assert cli.main(["remix", str(script)]) == 0
        assert (tmp_path / "out.skel").read_text().startswith("previz-skel/1")
        assert len(list((tmp_path / "poses").glob("pose_*.png"))) == 4

    def test_bad_op_reports_line(self, tmp_path, capsys):
        script = tmp_path / "script.txt"
        script.write_text("explode everything\n")
        assert cli.main(["remix", str(script)]) == 1
        assert "explode" in capsys.readouterr().err
