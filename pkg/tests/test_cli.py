from __future__ import annotations

import json

import numpy as np
import pytest

from speckletk import read_stack
from speckletk.cli import main
from speckletk.images import read_f32m, read_pgm, read_rgb_or_gray, write_pgm, write_png_rgb


@pytest.fixture(scope="module")
def sim_stack(tmp_path_factory):
    """Small deterministic stack produced through the CLI itself."""
    out = tmp_path_factory.mktemp("fixture") / "glyph.spk"
    rc = main(
        [
            "simulate", "--glyph", "disk", "--frames", "24", "--size", "48",
            "--seed", "9", "-o", str(out),
        ]
    )
    assert rc == 0
    return out


class TestProcess:
    def test_writes_map_and_sidecar(self, sim_stack, tmp_path):
        out = tmp_path / "avd.pgm"
        rc = main(
            ["process", "--algo", "avd", "--phi", "5", "--alpha", "2",
             "-i", str(sim_stack), "-o", str(out)]
        )
        assert rc == 0
        img = read_pgm(out)
        assert img.shape == (48, 48)
        sidecar = json.loads((tmp_path / "avd.pgm.json").read_text())
        assert sidecar["algorithm"] == "avd"
        assert sidecar["phi_degrees"] == 5.0
        assert sidecar["alpha"] == 2.0
        assert sidecar["normalization"] == "minmax"
        assert len(sidecar["input_sha256"]) == 64

    def test_missing_input_exits_2(self, tmp_path, capsys):
        rc = main(["process", "--algo", "avd", "-i", str(tmp_path / "nope.spk"),
                   "-o", str(tmp_path / "x.pgm")])
        assert rc == 2
        assert "nope.spk" in capsys.readouterr().err

    def test_deterministic_reruns(self, sim_stack, tmp_path):
        out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
        args = ["process", "--algo", "tau", "--phi", "70", "--alpha", "1.5", "-i", str(sim_stack)]
        assert main(args + ["-o", str(out1)]) == 0
        assert main(args + ["-o", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_raw_f32m_output(self, sim_stack, tmp_path):
        out = tmp_path / "raw.f32m"
        assert main(["process", "--algo", "fujii", "--phi", "110",
                     "-i", str(sim_stack), "-o", str(out)]) == 0
        values = read_f32m(out)
        assert values.shape == (48, 48)
        assert np.all(values >= 0)

    def test_pseudocolor_lut(self, sim_stack, tmp_path):
        lut = tmp_path / "lut.csv"
        lut.write_text("\n".join(f"{i},{i},{255 - i},0" for i in range(256)))
        out = tmp_path / "pc.png"
        assert main(["process", "--algo", "avd", "--phi", "0",
                     "-i", str(sim_stack), "-o", str(out), "--lut", str(lut)]) == 0
        img = read_rgb_or_gray(out)
        assert img.ndim == 3 and img.shape[2] == 3
        assert np.array_equal(img[..., 0] + img[..., 1], np.full((48, 48), 255, np.uint8))

    def test_fixed_norm_flag(self, sim_stack, tmp_path):
        out = tmp_path / "fixed.pgm"
        assert main(["process", "--algo", "avd", "--norm", "fixed:0:200",
                     "-i", str(sim_stack), "-o", str(out)]) == 0
        assert main(["process", "--algo", "avd", "--norm", "fixed:5:1",
                     "-i", str(sim_stack), "-o", str(tmp_path / "bad.pgm")]) == 2


class TestSweep:
    def test_cardinality_and_index(self, sim_stack, tmp_path):
        out_dir = tmp_path / "sweep"
        rc = main(["sweep", "-i", str(sim_stack), "-O", str(out_dir),
                   "--algos", "avd", "--phis", "0,5", "--alphas", "1"])
        assert rc == 0
        assert (out_dir / "avd_phi0_a1.pgm").exists()
        assert (out_dir / "avd_phi5_a1.pgm").exists()
        assert (out_dir / "contact_sheet.png").exists()
        rows = (out_dir / "index.csv").read_text().strip().splitlines()
        assert rows[0] == "algorithm,phi,alpha,file"
        assert len(rows) == 3

    def test_reported_angles_all_covered(self, sim_stack, tmp_path):
        out_dir = tmp_path / "grid"
        phis = [0, 5, 50, 70, 75, 80, 110]
        rc = main(["sweep", "-i", str(sim_stack), "-O", str(out_dir),
                   "--algos", "avd,fujii,tau", "--phis", ",".join(map(str, phis)),
                   "--alphas", "1,2", "--threads", "2"])
        assert rc == 0
        files = sorted(p.name for p in out_dir.glob("*.pgm"))
        assert len(files) == 3 * len(phis) * 2
        for phi in phis:
            assert f"tau_phi{phi}_a2.pgm" in files

    def test_rerun_is_byte_identical(self, sim_stack, tmp_path):
        d1, d2 = tmp_path / "s1", tmp_path / "s2"
        args = ["sweep", "-i", str(sim_stack), "--algos", "avd,gd",
                "--phis", "0,90", "--alphas", "1"]
        assert main(args + ["-O", str(d1)]) == 0
        assert main(args + ["-O", str(d2)]) == 0
        for p1 in sorted(d1.iterdir()):
            p2 = d2 / p1.name
            if p1.suffix == ".json":
                continue  # sidecars embed the output-independent spec only
            assert p1.read_bytes() == p2.read_bytes(), p1.name

    def test_empty_sweep_rejected(self, sim_stack, tmp_path):
        rc = main(["sweep", "-i", str(sim_stack), "-O", str(tmp_path / "e"),
                   "--algos", "", "--phis", "0", "--alphas", "1"])
        assert rc == 2

    def test_contact_sheet_pages_at_64_tiles(self, sim_stack, tmp_path):
        out_dir = tmp_path / "paged"
        phis = ",".join(str(p) for p in range(0, 115, 5))  # 23 angles x 3 algos = 69 tiles
        rc = main(["sweep", "-i", str(sim_stack), "-O", str(out_dir),
                   "--algos", "avd,fujii,tau", "--phis", phis, "--alphas", "1"])
        assert rc == 0
        assert (out_dir / "contact_sheet.png").exists()
        assert (out_dir / "contact_sheet_2.png").exists()
        assert not (out_dir / "contact_sheet_3.png").exists()
        assert len(list(out_dir.glob("*.pgm"))) == 69


class TestCompose:
    def make_maps(self, sim_stack, tmp_path):
        paths = []
        for phi in ("0", "50", "75"):
            p = tmp_path / f"m{phi}.f32m"
            assert main(["process", "--algo", "avd", "--phi", phi,
                         "-i", str(sim_stack), "-o", str(p)]) == 0
            paths.append(p)
        return paths

    def test_explicit_channels(self, sim_stack, tmp_path):
        r, g, b = self.make_maps(sim_stack, tmp_path)
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({
            "r": {"map": str(r), "alpha": 2.0},
            "g": {"map": str(g), "alpha": 2.0},
            "b": {"map": str(b), "alpha": 2.0},
        }))
        out = tmp_path / "comp.png"
        assert main(["compose", "--spec", str(spec), "-o", str(out)]) == 0
        assert read_rgb_or_gray(out).shape == (48, 48, 3)

    def test_identical_sources_make_gray(self, sim_stack, tmp_path):
        r, _, _ = self.make_maps(sim_stack, tmp_path)
        spec = tmp_path / "gray.json"
        spec.write_text(json.dumps({ch: {"map": str(r), "alpha": 1.0} for ch in "rgb"}))
        out = tmp_path / "gray.png"
        assert main(["compose", "--spec", str(spec), "-o", str(out)]) == 0
        img = read_rgb_or_gray(out)
        assert np.array_equal(img[..., 0], img[..., 1])
        assert np.array_equal(img[..., 0], img[..., 2])

    def test_preset_over_stack(self, sim_stack, tmp_path):
        spec = tmp_path / "preset.json"
        spec.write_text(json.dumps({"preset": "fig6b", "stack": str(sim_stack)}))
        out = tmp_path / "preset.png"
        assert main(["compose", "--spec", str(spec), "-o", str(out)]) == 0
        sidecar = json.loads((tmp_path / "preset.png.json").read_text())
        assert sidecar["bindings"]["r"] == {"algo": "avd", "phi": 5.0, "alpha": 2.0, "light": "infrared"}

    def test_two_sources_only_is_error(self, sim_stack, tmp_path, capsys):
        r, g, _ = self.make_maps(sim_stack, tmp_path)
        spec = tmp_path / "two.json"
        spec.write_text(json.dumps({
            "r": {"map": str(r)}, "g": {"map": str(g)},
        }))
        rc = main(["compose", "--spec", str(spec), "-o", str(tmp_path / "x.png")])
        assert rc == 2
        assert "b" in capsys.readouterr().err
        assert not (tmp_path / "x.png").exists()

    def test_unresolved_map_exits_2(self, tmp_path):
        spec = tmp_path / "missing.json"
        spec.write_text(json.dumps({ch: {"map": str(tmp_path / "gone.f32m")} for ch in "rgb"}))
        assert main(["compose", "--spec", str(spec), "-o", str(tmp_path / "x.png")]) == 2


class TestEdges:
    def test_uniform_input_all_zero(self, tmp_path):
        src = tmp_path / "flat.pgm"
        write_pgm(np.full((32, 32), 99, np.uint8), src)
        out = tmp_path / "edges.pgm"
        assert main(["edges", "-i", str(src), "-o", str(out), "-t", "0.7"]) == 0
        assert read_pgm(out).sum() == 0

    def test_step_image_produces_edge(self, tmp_path):
        img = np.zeros((32, 32), np.uint8)
        img[:, 16:] = 255
        src = tmp_path / "step.png"
        write_png_rgb(np.stack([img] * 3, axis=-1), src)
        out = tmp_path / "e.pgm"
        assert main(["edges", "-i", str(src), "-o", str(out), "-t", "0.7", "--sigma", "1"]) == 0
        edge = read_pgm(out)
        assert set(np.unique(edge)) == {0, 255}

    def test_zero_threshold_rejected(self, tmp_path):
        src = tmp_path / "flat.pgm"
        write_pgm(np.zeros((8, 8), np.uint8), src)
        assert main(["edges", "-i", str(src), "-o", str(tmp_path / "o.pgm"), "-t", "0"]) == 2


class TestSimulate:
    def test_smoke_writes_stack_and_truth(self, tmp_path):
        out = tmp_path / "s.spk"
        rc = main(["simulate", "--glyph", "disk", "--frames", "8", "--size", "32",
                   "--seed", "1", "-o", str(out)])
        assert rc == 0
        stack = read_stack(out)
        assert (stack.width, stack.height, stack.n_frames) == (32, 32, 8)
        truth = read_f32m(tmp_path / "s.truth.f32m")
        assert truth.shape == (32, 32)

    def test_same_seed_identical_bytes(self, tmp_path):
        a, b = tmp_path / "a.spk", tmp_path / "b.spk"
        args = ["simulate", "--glyph", "rect", "--frames", "6", "--size", "24", "--seed", "4"]
        assert main(args + ["-o", str(a)]) == 0
        assert main(args + ["-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_single_frame_rejected(self, tmp_path, capsys):
        rc = main(["simulate", "--glyph", "disk", "--frames", "1", "-o", str(tmp_path / "x.spk")])
        assert rc == 2
        assert "frames" in capsys.readouterr().err
