import numpy as np

from grassflow.ambient import AmbientSpace
from grassflow.catalog import build_loop, field_catalog, list_generators
from grassflow.io import read_polylines, write_csv, write_json, write_polylines
from grassflow.loops import circle, torus_loop, trefoil

T = AmbientSpace.torus()


def test_list_contents_and_order():
    text = list_generators()
    lines = text.splitlines()
    names = [ln.split()[1] for ln in lines]
    for required in ("circle", "ellipse", "torus_loop", "trefoil", "shear", "translation", "abc", "r1"):
        assert required in names
    for kind in ("loop", "field", "diffeo"):
        block = [ln.split()[1] for ln in lines if ln.split()[0] == kind]
        assert block == sorted(block)
    assert list_generators() == text


def test_catalog_seeded_fields_deterministic():
    p = np.random.default_rng(0).uniform(size=(20, 3))
    a, b = field_catalog(T), field_catalog(T)
    for k in a:
        assert np.array_equal(a[k](p), b[k](p))


def test_build_loop_matches_generator():
    loop = build_loop("torus_loop", T, {"direction": "y", "offsets": (0.1, 0.2), "n": 64})
    assert np.array_equal(loop.vertices, torus_loop("y", (0.1, 0.2), 64, T).vertices)


def test_polyline_roundtrip(tmp_path):
    loops = [circle(1.3, 40), trefoil(64)]
    path = write_polylines(tmp_path / "p.txt", loops)
    back = read_polylines(path)
    for a, b in zip(loops, back):
        assert np.array_equal(a.vertices, b.vertices)


def test_polyline_roundtrip_torus_shift(tmp_path):
    loop = torus_loop("z", (0.3, 0.6), 32, T, wobble=0.05)
    path = write_polylines(tmp_path / "t.txt", [loop])
    (back,) = read_polylines(path, T)
    assert np.array_equal(back.vertices, loop.vertices)
    assert np.array_equal(back.shift, loop.shift)


def test_csv_and_json(tmp_path):
    p = write_csv(tmp_path / "d.csv", [{"step": 0, "value": 0.1}, {"step": 1, "value": 1 / 3}], ["step", "value"])
    lines = p.read_text().splitlines()
    assert lines[0] == "step,value"
    assert float(lines[2].split(",")[1]) == 1 / 3
    j = write_json(tmp_path / "r.json", {"b": np.float64(1.5), "a": np.arange(2)})
    assert j.read_text().index('"a"') < j.read_text().index('"b"')
