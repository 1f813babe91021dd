"""Command-line pipeline: parse config, run stages, persist artifacts.

Stages write into output.dir and are individually resumable: each one
reads what it needs from disk and fails with a missing-artifact error
naming the stage that produces it.  A cumulative manifest.json records
the config echo, per-stage wall times, diagnostics and sha256 digests
of every file written.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 missing dependency artifact.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time as time_mod
from pathlib import Path

import numpy as np

from . import __version__
from .compare import fit_c, write_fit_report
from .config import (RunConfig, apply_overrides, parse_config,
                     parse_config_text, validate_required)
from .correlation import (CorrelationMatrix, correlation_tdse, read_correlation,
                          velocity_from_zz, write_correlation,
                          write_correlation_binary)
from .errors import ConfigError, HeisencorrError, MissingArtifactError, \
    NumericalError
from .grid import apply_pz, apply_z, build_ground_state, inner, save_state
from .model import (assemble_model, cross_terms, ionization_profile,
                    model_correlation)
from .oracles import hydrogen_1s_moments, volkov_zz
from .pulse import keldysh_gamma

__all__ = ["main", "run_stage"]

STAGES = ("ground", "corr-tdse", "corr-free", "corr-model", "corr-vv",
          "fit", "oracle", "all")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class _Manifest:
    """Cumulative manifest.json in the output directory."""

    def __init__(self, outdir: Path, cfg: RunConfig):
        self.path = outdir / "manifest.json"
        if self.path.exists():
            with open(self.path) as fh:
                self.data = json.load(fh)
        else:
            self.data = {"stages": {}, "digests": {}}
        self.data["code_version"] = __version__
        self.data["config"] = {
            "values": cfg.values,
            "defaulted": list(cfg.defaulted),
            "source": cfg.source,
        }

    def record(self, stage: str, wall: float, files, diagnostics=None):
        entry = {"wall_time_s": round(wall, 3),
                 "files": [Path(f).name for f in files]}
        if diagnostics:
            entry.update(diagnostics)
        self.data["stages"][stage] = entry
        for f in files:
            self.data["digests"][Path(f).name] = _sha256(Path(f))

    def write(self):
        with open(self.path, "w") as fh:
            json.dump(self.data, fh, indent=1, sort_keys=True)
            fh.write("\n")


def _matrix_files(stem: Path):
    return [Path(str(stem) + ext) for ext in (".re.csv", ".im.csv", ".meta.json")]


def _write_matrix(c: CorrelationMatrix, stem: Path):
    write_correlation(c, stem, version=__version__)
    write_correlation_binary(c, str(stem) + ".cgrd")
    return _matrix_files(stem) + [Path(str(stem) + ".cgrd")]


def _load_matrix(stem: Path, producer: str) -> CorrelationMatrix:
    try:
        return read_correlation(stem)
    except FileNotFoundError as exc:
        raise MissingArtifactError(
            f"missing artifact {stem}.re.csv (run the {producer!r} stage first)"
        ) from exc


def _pulse_or_none(cfg: RunConfig):
    pls = cfg.pulse()
    return pls if pls.e0 != 0.0 else None


def _stage_ground(cfg: RunConfig, outdir: Path):
    grid = cfg.radial_grid()
    eig = build_ground_state(grid, cfg.potential(), cfg["grid.lmax"] + 1)
    z_phi = apply_z(eig.state)
    p_phi = apply_pz(eig.state)
    diag = {
        "energy": eig.energy,
        "z2": complex(inner(z_phi, z_phi)).real,
        "pz2": complex(inner(p_phi, p_phi)).real,
        "zpz_im": complex(inner(z_phi, p_phi)).imag,
    }
    wavs = outdir / "ground.wavs"
    save_state(eig.state, wavs)
    summary = outdir / "ground.json"
    with open(summary, "w") as fh:
        json.dump(diag, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return [wavs, summary], diag


def _run_correlation(cfg: RunConfig, pls, operator: str) -> CorrelationMatrix:
    return correlation_tdse(
        cfg.potential(), pls, cfg.radial_grid(), cfg.time_grid(),
        operator=operator, n_l=cfg["grid.lmax"] + 1, dt=cfg["time.dt"],
        use_mask=cfg["run.mask"], norm_loss_max=cfg["run.norm_loss_max"],
        jobs=cfg["run.jobs"], both_triangles=cfg["run.both_triangles"],
    )


def _stage_corr_tdse(cfg, outdir):
    c = _run_correlation(cfg, _pulse_or_none(cfg), "z")
    c.meta.update(e0=cfg["pulse.e0"], omega=cfg["pulse.omega"])
    return _write_matrix(c, outdir / "czz_tdse"), \
        {"absorber_loss": c.meta["absorber_loss"]}


def _stage_corr_free(cfg, outdir):
    c = _run_correlation(cfg, None, "z")
    c = CorrelationMatrix(c.kind, "free", c.grid, c.values,
                          dict(c.meta, e0=0.0, omega=cfg["pulse.omega"]))
    return _write_matrix(c, outdir / "czz_free"), \
        {"absorber_loss": c.meta["absorber_loss"]}


def _stage_corr_vv(cfg, outdir):
    c = _run_correlation(cfg, _pulse_or_none(cfg), "v_z")
    c.meta.update(e0=cfg["pulse.e0"], omega=cfg["pulse.omega"])
    return _write_matrix(c, outdir / "cvv_tdse"), \
        {"absorber_loss": c.meta["absorber_loss"]}


def _decomposition(cfg: RunConfig, outdir: Path):
    c0 = _load_matrix(outdir / "czz_free", "corr-free")
    tgrid = cfg.time_grid()
    pls = cfg.pulse()
    prof = ionization_profile(pls, cfg.rate_provider(), tgrid)
    cross = cross_terms(cfg.potential(), cfg.radial_grid(), tgrid,
                        n_l=cfg["grid.lmax"] + 1, dt=cfg["time.dt"],
                        use_mask=cfg["run.mask"])
    d = assemble_model(c0, cross, prof, hydrogen_1s_moments())
    d.meta.update(rate=cfg["model.rate"], e0=pls.e0, omega=pls.omega)
    profile_path = outdir / "profile.tsv"
    np.savetxt(profile_path,
               np.column_stack([tgrid.times, prof.w, prof.p]),
               fmt="%.17g", delimiter="\t", header="t\tW\tP")
    return d, [profile_path]


def _stage_fit(cfg, outdir):
    d, files = _decomposition(cfg, outdir)
    target = _load_matrix(outdir / "czz_tdse", "corr-tdse")
    try:
        report = fit_c(d, target)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report_path = outdir / "fit_report.json"
    write_fit_report(report, report_path)
    print(f"  fitted c = {report.c_star:.6g}  "
          f"(objective {report.objective:.6g})")
    for name, value in sorted(report.metric_table.items()):
        print(f"  {name:24s} {value: .6f}")
    return files + [report_path], {"c_star": report.c_star,
                                   "objective": report.objective,
                                   **report.metric_table}


def _model_constant(cfg: RunConfig, outdir: Path) -> float:
    c = cfg["model.c"]
    if c != "fit":
        return float(c)
    if cfg["pulse.e0"] == 0.0:
        return 0.0  # no field, nothing ionizes; any c gives the same matrix
    report_path = outdir / "fit_report.json"
    if not report_path.exists():
        raise MissingArtifactError(
            f"model.c = fit needs {report_path} (run the 'fit' stage first)"
        )
    with open(report_path) as fh:
        return float(json.load(fh)["c_star"])


def _stage_corr_model(cfg, outdir):
    c_const = _model_constant(cfg, outdir)
    d, files = _decomposition(cfg, outdir)
    cm = model_correlation(d, c_const)
    cm.meta.update(e0=cfg["pulse.e0"], omega=cfg["pulse.omega"])
    return _write_matrix(cm, outdir / "czz_model") + files, {"c": c_const}


def _stage_oracle(cfg, outdir):
    mom = hydrogen_1s_moments()
    tgrid = cfg.time_grid()
    t = tgrid.times
    vals = np.empty((tgrid.n_t, tgrid.n_t), dtype=np.complex128)
    for i in range(tgrid.n_t):
        vals[i] = volkov_zz(mom, t, t[i])
    c = CorrelationMatrix("zz", "oracle", tgrid, vals,
                          {"oracle": "free-motion bilinear form",
                           "m_zz": mom.m_zz.real, "m_zp_im": mom.m_zp.imag,
                           "m_pp": mom.m_pp.real})
    pls = cfg.pulse()
    print(f"  initial-state moments: z2={mom.m_zz}, zpz={mom.m_zp}, "
          f"pz2={mom.m_pp}")
    if pls.e0 > 0:
        print(f"  Keldysh gamma = {keldysh_gamma(pls, 0.5):.4f}")
    return _write_matrix(c, outdir / "czz_oracle"), {}


_STAGE_FUNCS = {
    "ground": _stage_ground,
    "corr-tdse": _stage_corr_tdse,
    "corr-free": _stage_corr_free,
    "corr-vv": _stage_corr_vv,
    "fit": _stage_fit,
    "corr-model": _stage_corr_model,
    "oracle": _stage_oracle,
}


def run_stage(cfg: RunConfig, stage: str, outdir: Path) -> None:
    """Run one stage (or `all`) and update the manifest."""
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(outdir, cfg)
    if stage == "all":
        ordered = ["ground", "corr-free", "corr-tdse", "corr-vv"]
        if cfg["pulse.e0"] != 0.0:
            ordered.append("fit")
        ordered.append("corr-model")
    else:
        ordered = [stage]
    for name in ordered:
        print(f"[{name}]")
        start = time_mod.perf_counter()
        files, diag = _STAGE_FUNCS[name](cfg, outdir)
        wall = time_mod.perf_counter() - start
        manifest.record(name, wall, files, diag)
        print(f"  done in {wall:.1f} s: "
              + ", ".join(Path(f).name for f in files))
    manifest.write()


def _split_overrides(extras):
    """--section.key value (or --section.key=value) pairs to a dict."""
    overrides = {}
    i = 0
    while i < len(extras):
        tok = extras[i]
        if not tok.startswith("--") or "." not in tok:
            raise ConfigError(f"unrecognized argument {tok!r}")
        body = tok[2:]
        if "=" in body:
            key, _, val = body.partition("=")
            i += 1
        else:
            key = body
            if i + 1 >= len(extras):
                raise ConfigError(f"flag --{key} needs a value")
            val = extras[i + 1]
            i += 2
        overrides[key] = val
    return overrides


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="heisencorr",
        description="Two-time correlation functions of a one-electron atom "
                    "in a short laser pulse: ab initio engine, analytic "
                    "model, fitting, artifacts.",
        epilog="Any config key can be overridden as --section.key value. "
               "HEISENCORR_OUT overrides output.dir.",
    )
    parser.add_argument("stage", choices=STAGES)
    parser.add_argument("-c", "--config", help="config file (key = value "
                        "sections); defaults apply for missing keys")
    parser.add_argument("--jobs", type=int, help="worker process count "
                        "(same as --run.jobs)")
    args, extras = parser.parse_known_args(argv)

    try:
        if args.config:
            cfg = parse_config(args.config)
        else:
            cfg = parse_config_text("", source="<defaults>", partial=True)
        overrides = _split_overrides(extras)
        if args.jobs is not None:
            overrides["run.jobs"] = args.jobs
        cfg = validate_required(apply_overrides(cfg, overrides))
        outdir = Path(os.environ.get("HEISENCORR_OUT")
                      or cfg["output.dir"])
        run_stage(cfg, args.stage, outdir)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
