import hashlib
import json

import numpy as np
import pytest

from plotview.render import Panel, PlotSpec, load_panel, render, signed_power


def write_stem(directory, name, values, *, kind="zz", source="tdse",
               e0=0.06, omega=0.057, t_total=110.0):
    """Produce the three-file contract for one matrix by hand."""
    stem = directory / name
    values = np.asarray(values, dtype=complex)
    n = values.shape[0]
    np.savetxt(f"{stem}.re.csv", values.real, fmt="%.17g", delimiter=",")
    np.savetxt(f"{stem}.im.csv", values.imag, fmt="%.17g", delimiter=",")
    extra = {}
    if e0 is not None:
        extra["e0"] = e0
    if omega is not None:
        extra["omega"] = omega
    meta = {"kind": kind, "source": source,
            "grid": {"n_t": n, "t_total": t_total,
                     "times": list(np.linspace(0.0, t_total, n))},
            "meta": extra, "version": "0"}
    with open(f"{stem}.meta.json", "w") as fh:
        json.dump(meta, fh)
    return stem


def stationary_matrix(n=16):
    t = np.linspace(0.0, 110.0, n)
    return np.exp(-0.5j * (t[:, None] - t[None, :]))


def test_signed_power_preserves_sign_and_monotone():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((40, 40))
    y = signed_power(x, 0.2)
    assert np.array_equal(np.sign(y), np.sign(x))
    # odd
    assert np.allclose(signed_power(-x, 0.2), -y)
    # monotone on a sorted line through zero
    line = np.linspace(-3.0, 3.0, 101)
    assert np.all(np.diff(signed_power(line, 0.2)) > 0)
    # identity at power 1
    assert np.array_equal(signed_power(x, 1.0), x)


def test_signed_power_rejects_bad_exponent():
    for bad in (0.0, -0.3, 1.5):
        with pytest.raises(ValueError):
            signed_power(np.ones(3), bad)


def test_power_does_not_move_zero_crossings():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((20, 20))
    x[x < 0.1] -= 0.2  # keep values away from exact zero
    assert np.array_equal(np.sign(signed_power(x, 0.2)),
                          np.sign(signed_power(x, 1.0)))


def test_load_panel_round_trip(tmp_path):
    vals = stationary_matrix()
    stem = write_stem(tmp_path, "czz_free", vals, source="free", e0=0.0)
    panel = load_panel(stem)
    assert np.allclose(panel.values, vals)
    assert panel.source == "free"
    assert panel.e0 == 0.0
    assert panel.kind == "zz"
    assert panel.times.shape == (16,)


def test_load_panel_shape_mismatch(tmp_path):
    stem = write_stem(tmp_path, "bad", stationary_matrix())
    np.savetxt(f"{stem}.im.csv", np.zeros((4, 4)), delimiter=",")
    with pytest.raises(ValueError, match="shapes differ"):
        load_panel(stem)


def test_load_panel_missing_meta(tmp_path):
    stem = write_stem(tmp_path, "orphan", stationary_matrix())
    (tmp_path / "orphan.meta.json").unlink()
    with pytest.raises(FileNotFoundError, match="meta"):
        load_panel(stem)


def test_load_panel_meta_shape_disagreement(tmp_path):
    stem = write_stem(tmp_path, "short", stationary_matrix())
    meta = json.loads((tmp_path / "short.meta.json").read_text())
    meta["grid"]["n_t"] = 5
    (tmp_path / "short.meta.json").write_text(json.dumps(meta))
    with pytest.raises(ValueError, match="n_t"):
        load_panel(stem)


def test_label_comes_from_meta_not_filename(tmp_path):
    stem = write_stem(tmp_path, "definitely_not_the_source",
                      stationary_matrix(), source="model", e0=0.04)
    panel = load_panel(stem)
    assert "model" in panel.label()
    assert "E0=0.04" in panel.label()
    assert "definitely_not_the_source" not in panel.label()


def test_label_without_field_metadata():
    panel = Panel(np.eye(3, dtype=complex), "vv", "oracle",
                  np.linspace(0, 1, 3), 1.0, None, None)
    assert panel.label() == "C_vv  oracle"


def test_render_writes_image(tmp_path):
    stem = write_stem(tmp_path, "czz_tdse", stationary_matrix())
    out = tmp_path / "fig.png"
    render(PlotSpec((str(stem),), part="re", power=0.2, out=str(out)))
    assert out.exists() and out.stat().st_size > 0


def test_render_is_read_only(tmp_path):
    stem = write_stem(tmp_path, "czz_tdse", stationary_matrix())
    files = [f"{stem}{ext}" for ext in (".re.csv", ".im.csv", ".meta.json")]
    before = [hashlib.sha256(open(f, "rb").read()).hexdigest() for f in files]
    render(PlotSpec((str(stem),), out=str(tmp_path / "fig.png")))
    after = [hashlib.sha256(open(f, "rb").read()).hexdigest() for f in files]
    assert before == after


def test_constant_matrix_colorbar_endpoints(tmp_path, monkeypatch):
    import matplotlib.pyplot as plt
    vals = np.full((8, 8), 0.7, dtype=complex)
    stem = write_stem(tmp_path, "const", vals)
    clims = []
    orig = plt.Figure.savefig

    def capture(fig, *a, **k):
        clims.append(fig.axes[0].images[0].get_clim())
        return orig(fig, *a, **k)

    monkeypatch.setattr(plt.Figure, "savefig", capture)
    render(PlotSpec((str(stem),), out=str(tmp_path / "fig.png")))
    # a degenerate range is expanded symmetrically around the constant,
    # so the endpoints bracket it and their midpoint sits on it
    lo, hi = clims[0]
    assert lo <= 0.7 <= hi
    assert 0.5 * (lo + hi) == pytest.approx(0.7)


def test_side_by_side_panels_share_color_scale(tmp_path, monkeypatch):
    import matplotlib.pyplot as plt
    a = write_stem(tmp_path, "a", 0.5 * stationary_matrix(), source="model")
    b = write_stem(tmp_path, "b", 2.0 * stationary_matrix(), source="tdse")
    clims = []
    orig = plt.Figure.savefig

    def capture(fig, *args, **kwargs):
        clims.extend(img.get_clim() for ax in fig.axes for img in ax.images)
        return orig(fig, *args, **kwargs)

    monkeypatch.setattr(plt.Figure, "savefig", capture)
    render(PlotSpec((str(a), str(b)), part="re",
                    out=str(tmp_path / "fig.png")))
    big = 2.0 * stationary_matrix().real
    assert len(clims) == 2
    assert clims[0] == clims[1]  # shared scale
    # the wider panel sets both endpoints
    assert clims[0] == pytest.approx((big.min(), big.max()))


def test_plotspec_validation(tmp_path):
    with pytest.raises(ValueError):
        PlotSpec((), out="x.png")
    with pytest.raises(ValueError):
        PlotSpec(("s",), part="abs")
    with pytest.raises(ValueError):
        PlotSpec(("s",), power=0.0)
    with pytest.raises(ValueError):
        PlotSpec(("s",), power=1.2)


def test_six_panel_run(tmp_path):
    """Re/Im x tdse/model/free from one simulated run layout."""
    rng = np.random.default_rng(2)
    stems = []
    for name, source in (("czz_tdse", "tdse"), ("czz_model", "model"),
                         ("czz_free", "free")):
        vals = stationary_matrix() + 0.1 * (
            rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
        stems.append(str(write_stem(tmp_path, name, vals, source=source)))
    for part in ("re", "im"):
        out = tmp_path / f"panels_{part}.png"
        render(PlotSpec(tuple(stems), part=part, power=0.2, out=str(out)))
        assert out.exists() and out.stat().st_size > 0
