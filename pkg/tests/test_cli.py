import json

import numpy as np
import pytest

from fastme.attention import load_attention_map
from fastme.cli import main

from conftest import make_sequence, write_y4m_file


@pytest.fixture(scope="module")
def video(tmp_path_factory):
    frames = make_sequence(4, width=96, height=80, seed=41)
    return write_y4m_file(tmp_path_factory.mktemp("cli") / "clip.y4m", frames)


def strip_time_column(text):
    return [
        ",".join(line.split(",")[:5] + line.split(",")[6:])
        for line in text.strip().splitlines()
    ]


class TestHelp:
    @pytest.mark.parametrize(
        "argv", [["--help"], ["bench", "--help"], ["estimate", "--help"],
                 ["attn-synth", "--help"], ["cdf", "--help"]]
    )
    def test_help_exits_zero(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 0
        assert "usage" in capsys.readouterr().out


class TestBench:
    def test_five_engines_five_rows(self, video, tmp_path, capsys):
        csv = tmp_path / "bench.csv"
        code = main([
            "bench", "--input", str(video),
            "--engines", "fs,ds,tss,adaptive,fastme",
            "--attn", "synthetic:gaussian",
            "--frames", "3",
            "--csv", str(csv),
            "--jobs", "1",
        ])
        assert code == 0
        lines = csv.read_text().strip().splitlines()
        assert len(lines) == 6  # header + one row per engine

    def test_fastme_without_attn_is_config_error(self, video, tmp_path, capsys):
        code = main([
            "bench", "--input", str(video), "--engines", "fastme",
            "--csv", str(tmp_path / "x.csv"),
        ])
        assert code == 2
        assert "--attn" in capsys.readouterr().err

    def test_seeded_reruns_identical(self, video, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            csv = tmp_path / name
            code = main([
                "bench", "--input", str(video),
                "--engines", "fs,fastme",
                "--attn", "synthetic:gaussian",
                "--seed", "7",
                "--csv", str(csv),
                "--jobs", "2",
            ])
            assert code == 0
            outs.append(strip_time_column(csv.read_text()))
        assert outs[0] == outs[1]

    def test_missing_file_is_runtime_error(self, tmp_path, capsys):
        code = main([
            "bench", "--input", str(tmp_path / "absent.y4m"), "--engines", "fs",
            "--csv", str(tmp_path / "x.csv"),
        ])
        assert code == 1

    def test_jobs_env_fallback(self, video, tmp_path, monkeypatch):
        monkeypatch.setenv("FASTME_JOBS", "2")
        code = main([
            "bench", "--input", str(video), "--engines", "ds",
            "--csv", str(tmp_path / "env.csv"),
        ])
        assert code == 0

    def test_jobs_env_must_be_integer(self, video, tmp_path, monkeypatch):
        monkeypatch.setenv("FASTME_JOBS", "many")
        code = main([
            "bench", "--input", str(video), "--engines", "ds",
            "--csv", str(tmp_path / "env.csv"),
        ])
        assert code == 2


class TestEstimate:
    def test_identical_frames_zero_field(self, tmp_path, capsys):
        from fastme.frame import LumaPlane
        from conftest import smooth_texture

        frame = LumaPlane(smooth_texture(96, 80, 51))
        video = write_y4m_file(tmp_path / "same.y4m", [frame, frame])
        out = tmp_path / "field.json"
        code = main([
            "estimate", "--input", str(video), "--frame", "1",
            "--engine", "fs", "--out", str(out), "--jobs", "1",
        ])
        assert code == 0
        payload = json.loads(out.read_text())
        assert all(v == [0, 0] for v in payload["vectors"])
        assert payload["grid"] == {"cols": 6, "rows": 5}

    def test_out_of_range_frame_index(self, video, capsys):
        code = main([
            "estimate", "--input", str(video), "--frame", "99", "--engine", "fs",
        ])
        assert code == 1
        assert "99" in capsys.readouterr().err

    def test_fastme_reports_stopping_step(self, video, tmp_path):
        out = tmp_path / "fm.json"
        code = main([
            "estimate", "--input", str(video), "--frame", "1",
            "--engine", "fastme", "--attn", "synthetic:gaussian",
            "--out", str(out), "--jobs", "1",
        ])
        assert code == 0
        payload = json.loads(out.read_text())
        assert "stopping_step" in payload
        assert any(s is not None for s in payload["stopping_step"])


class TestAttnSynth:
    def test_uniform_map(self, tmp_path, capsys):
        out = tmp_path / "u.attn.json"
        code = main([
            "attn-synth", "--kind", "uniform:0.5",
            "--cols", "22", "--rows", "18", "--out", str(out),
        ])
        assert code == 0
        amap = load_attention_map(out)
        assert (amap.cols, amap.rows) == (22, 18)
        assert np.allclose(amap.scores, 0.5)

    def test_bogus_kind(self, tmp_path, capsys):
        code = main([
            "attn-synth", "--kind", "bogus",
            "--cols", "4", "--rows", "4", "--out", str(tmp_path / "b.attn.json"),
        ])
        assert code == 2


class TestCdf:
    def test_quantile_marked(self, tmp_path, capsys):
        sads = tmp_path / "sads.txt"
        sads.write_text("".join(f"{i}\n" for i in range(1, 101)))
        out = tmp_path / "cdf.tsv"
        code = main([
            "cdf", "--input", str(sads), "--quantiles", "0.1", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "# quantile\t0.1\t10.000000"
        data = [line.split("\t") for line in lines[1:]]
        fs = [float(f) for _, f in data]
        assert fs == sorted(fs)

    def test_empty_input(self, tmp_path, capsys):
        sads = tmp_path / "empty.txt"
        sads.write_text("")
        code = main(["cdf", "--input", str(sads), "--out", str(tmp_path / "o.tsv")])
        assert code == 2
