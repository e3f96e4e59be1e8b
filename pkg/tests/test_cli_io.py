import json

import numpy as np
import pytest

from g2assoc import cli_io as io
from g2assoc.cli import main
from g2assoc.errors import ConfigError, UnsupportedFormat
from g2assoc.mesh import SurfaceMesh
from g2assoc.ruled import cone_mesh, great_circle_state


def test_complex_parsing():
    assert io.parse_complex("0.1+0.05i") == 0.1 + 0.05j
    assert io.parse_complex("0.1-0.05i") == 0.1 - 0.05j
    assert io.parse_complex("-0.07i") == -0.07j
    assert io.parse_complex("1e-3-2.5e2i") == 1e-3 - 250j
    assert io.parse_complex("3") == 3
    for bad in ("abc", "1+2j", "1++2i"):
        with pytest.raises(ConfigError):
            io.parse_complex(bad)


def test_value_roundtrip_bit_exact():
    rng = np.random.default_rng(0)
    vals = {"a": float(rng.normal()), "b": complex(rng.normal(), rng.normal()), "n": 7,
            "f": 1.0, "r": (0.1, 1 / 3), "s": "1/3", "flag": True}
    cfg = io.RunConfig("closedform", vals)
    back = io.RunConfig.loads(cfg.dumps())
    assert back.values == vals
    assert back.dumps() == cfg.dumps()


def test_config_errors():
    with pytest.raises(ConfigError):
        io.RunConfig.loads("generator=affine\nnot a pair\n")
    with pytest.raises(ConfigError):
        io.RunConfig.loads("x=1\n")
    with pytest.raises(ConfigError):
        io.RunConfig.loads("format_version=2\ngenerator=affine\n")
    with pytest.raises(ConfigError):
        io.RunConfig("other")
    cfg = io.RunConfig.loads("# comment\nformat_version=1\ngenerator=ruled\nN=64  # grid\n")
    assert cfg.values == {"N": 64}


def test_grid_and_range():
    assert io.parse_grid("20x20x64") == (20, 20, 64)
    assert io.parse_range("0,1.5") == (0.0, 1.5)
    for bad in ("20x20", "axbxc", "0x1x1"):
        with pytest.raises(ConfigError):
            io.parse_grid(bad)
    with pytest.raises(ConfigError):
        io.parse_range("2,1")


def test_initial_data_grammar():
    w = np.arange(42, dtype=float).reshape(6, 7) / 7
    text = io.render_initial_data(w)
    assert np.array_equal(io.parse_initial_data("# header\n" + text), w)
    with pytest.raises(ConfigError):
        io.parse_initial_data(text.replace("w6", "w7"))
    with pytest.raises(ConfigError):
        io.parse_initial_data("\n".join(text.splitlines()[:5]))
    with pytest.raises(ConfigError):
        io.parse_initial_data(text.replace("w1:", "w1: 1"))


def _single_mesh():
    f = np.eye(7)[:3][None]
    return SurfaceMesh.from_frames([[0.1, 0.2, 0.3]], [np.arange(7) / 3], f)


def test_csv_export(tmp_path):
    p = tmp_path / "m.csv"
    io.export_mesh(_single_mesh(), p)
    lines = p.read_text().splitlines()
    assert lines[0] == "# format_version=1"
    assert lines[1] == "y1,y2,t,x1,x2,x3,x4,x5,x6,x7,res_assoc,res_calib"
    assert len(lines) == 3
    vals = [float(v) for v in lines[2].split(",")]
    assert vals[4] == 1 / 3


def test_json_roundtrip(tmp_path):
    st = great_circle_state(16)
    m = cone_mesh(st, [0.0, 1.0])
    p = tmp_path / "m.json"
    io.export_mesh(m, p)
    back = io.load_mesh(p)
    assert np.array_equal(back.points, m.points)
    assert np.array_equal(back.frames, m.frames)
    assert np.array_equal(np.isnan(back.res_calib), np.isnan(m.res_calib))
    assert np.array_equal(back.recompute()[0], m.recompute()[0])
    io.export_mesh(m, tmp_path / "n.json")
    assert (tmp_path / "n.json").read_bytes() == p.read_bytes()


def test_obj_projection(tmp_path):
    st = great_circle_state(16)
    m = cone_mesh(st, [1.0, 2.0])
    p = tmp_path / "m.obj3"
    io.export_mesh(m, p, "obj3")
    lines = p.read_text().splitlines()
    assert lines[0] == "# format_version=1"
    v = np.array([[float(c) for c in l.split()[1:]] for l in lines if l.startswith("v ")])
    assert np.allclose(v[16:], 2 * v[:16])
    assert sum(l.startswith("f ") for l in lines) == 15
    with pytest.raises(UnsupportedFormat):
        io.export_mesh(m, tmp_path / "m.vtk")
    with pytest.raises(ConfigError):
        io.projection_matrix((1, 1, 2))


def test_cli_selftest_and_periodicity(capsys):
    assert main(["selftest"]) == 0
    assert "invariants passed" in capsys.readouterr().out
    assert main(["periodicity", "--s", "1/3"]) == 0
    out = capsys.readouterr().out
    assert "a=(-8,3,5) lambda=7 period=4pi" in out
    assert main(["periodicity", "--s", "2/4"]) == 2


def test_cli_closedform_and_verify(tmp_path, capsys):
    out = tmp_path / "m.json"
    code = main(["closedform", "--s", "1/3", "--B", "0.1+0.05i", "--C=-0.07i",
                 "--grid", "6x6x8", "--out", str(out)])
    assert code == 0
    rep = json.loads((tmp_path / "m.json.report.json").read_text())
    assert rep["assoc"]["max"] < 1e-8
    assert main(["verify", str(out)]) == 0
    assert main(["verify", str(out), "--assoc-tol", "0"]) == 1
    assert main(["verify", str(tmp_path / "missing.json")]) == 2


def test_cli_config_file(tmp_path):
    init = tmp_path / "init.txt"
    init.write_text(io.render_initial_data(np.eye(7)[:6] * 0.5))
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"generator=affine\ninit={init}\ngrid=3x3x3\nt_range=0,0.5\n"
                   f"out={tmp_path / 'a.csv'}\n")
    assert main(["affine", "--config", str(cfg)]) == 0
    assert (tmp_path / "a.csv").exists()
    bad = tmp_path / "bad.cfg"
    bad.write_text("generator=affine\ngrid=3x3\n")
    assert main(["affine", "--config", str(bad), "--init", str(init)]) == 2
    assert main(["ruled", "--config", str(cfg)]) == 2


def test_cli_determinism(tmp_path):
    args = ["closedform", "--s", "1/3", "--B", "0.1+0.05i", "--grid", "4x4x4"]
    main(args + ["--out", str(tmp_path / "a.csv")])
    main(args + ["--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
