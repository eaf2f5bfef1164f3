"""Command-line front end: seeded simulation, estimation, sweeps and rate fits.

Every command writes its outputs next to a manifest JSON recording the fully
resolved parameters; re-running with --from-manifest reproduces the outputs
byte for byte.  All numeric CSV fields use shortest round-trip decimals, so
parsing an emitted file recovers the exact doubles.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .frechet import EstimatorConfig, estimate_mean, naive_cutoff, naive_mean, oracle_mean
from .functions import (
    CurvePanel,
    NoiseModel,
    ShiftLaw,
    TestFunction,
    heavi_sine,
    mixt_gauss,
    simulate_panel,
    user_fourier,
)
from .experiment import (
    SweepGrid,
    rate_slope,
    relative_error_sweep,
    shift_rate_ladder,
    van_trees_bound,
)
from .spectral import reconstruct

RECON_GRID_POINTS = 1024


def _fmt(x) -> str:
    return repr(float(x))


def _make_function(name: str) -> TestFunction:
    name = name.lower()
    if name == "mixtgauss":
        return mixt_gauss()
    if name == "heavisine":
        return heavi_sine()
    raise click.ClickException(f"unknown test function {name!r}")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_manifest(outdir: Path, command: str, params: dict, outputs: list[str]) -> None:
    manifest = {
        "artifact_version": __version__,
        "command": command,
        "params": params,
        "seed": params.get("seed"),
        "outputs": outputs,
    }
    _write_json(outdir / f"{command}_manifest.json", manifest)


def _load_manifest(path: str, command: str) -> dict:
    manifest = json.loads(Path(path).read_text())
    if manifest.get("command") != command:
        raise click.ClickException(
            f"manifest is for {manifest.get('command')!r}, not {command!r}"
        )
    return manifest["params"]


def _prepare_outdir(out: str) -> Path:
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise click.ClickException(f"{flag} must be a comma-separated integer list")
    if not values:
        raise click.ClickException(f"{flag} is empty")
    return values


def _parse_m1(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise click.ClickException("--m1 must be an integer or 'auto'")


@click.group()
@click.version_option(__version__)
def main():
    """Smoothed Frechet means of randomly shifted noisy curves."""


# ----------------------------------------------------------------- simulate


def _run_simulate(params: dict, outdir: Path) -> list[str]:
    n, J = params["n"], params["J"]
    if n % 2 != 0:
        raise click.ClickException(f"--n must be even, got {n}")
    if J < 2:
        raise click.ClickException(f"--J must be >= 2, got {J}")
    f = _make_function(params["f"])
    try:
        law = ShiftLaw(kind="uniform", half_width=params["halfwidth"])
        noise = NoiseModel(rsnr=params["rsnr"]) if params["sigma"] is None else NoiseModel(
            sigma=params["sigma"]
        )
        panel = simulate_panel(f, n, J, law, noise, params["seed"])
    except ValueError as exc:
        raise click.ClickException(str(exc))

    lines = ["t," + ",".join(f"curve_{j}" for j in range(1, J + 1))]
    for row, t in zip(panel.samples, panel.design):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in row]))
    (outdir / "panel.csv").write_text("\n".join(lines) + "\n")

    _write_json(
        outdir / "truth.json",
        {
            "shifts": [float(s) for s in panel.truth.shifts],
            "sigma": panel.truth.sigma,
            "function": {"kind": f.kind, "params": [repr(p) for p in f.params]},
        },
    )
    return ["panel.csv", "truth.json"]


@main.command("simulate")
@click.option("--f", "fname", default="mixtgauss", help="mixtgauss|heavisine")
@click.option("--n", type=int, default=512, help="even number of design points")
@click.option("--J", "J", type=int, default=10, help="number of curves (>= 2)")
@click.option("--rsnr", type=float, default=0.5)
@click.option("--sigma", type=float, default=None, help="overrides --rsnr when set")
@click.option("--halfwidth", type=float, default=1.0 / 16.0)
@click.option("--seed", type=int, default=0)
@click.option("--out", default=".", help="output directory")
@click.option("--from-manifest", "from_manifest", default=None, type=click.Path(exists=True))
def cmd_simulate(fname, n, J, rsnr, sigma, halfwidth, seed, out, from_manifest):
    """Simulate a panel of shifted noisy curves (panel.csv + truth.json)."""
    params = {"f": fname, "n": n, "J": J, "rsnr": rsnr, "sigma": sigma,
              "halfwidth": halfwidth, "seed": seed}
    if from_manifest:
        params = _load_manifest(from_manifest, "simulate")
    outdir = _prepare_outdir(out)
    outputs = _run_simulate(params, outdir)
    _write_manifest(outdir, "simulate", params, outputs)


# ----------------------------------------------------------------- estimate


def _read_panel(path: str, truth_path: str | None) -> CurvePanel:
    try:
        lines = Path(path).read_text().strip().splitlines()
        header = lines[0].split(",")
        if header[0] != "t" or len(header) < 2:
            raise ValueError(f"{path}: expected header t,curve_1,...")
        data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    except (OSError, ValueError, IndexError) as exc:
        raise click.ClickException(f"cannot read panel: {exc}")
    n = data.shape[0]
    truth = None
    if truth_path is not None:
        try:
            raw = json.loads(Path(truth_path).read_text())
            fn = raw["function"]
            kind = fn["kind"]
            if kind == "fourier":
                f = user_fourier([complex(p) for p in fn["params"]])
            else:
                f = TestFunction(kind)
            from .functions import PanelTruth

            truth = PanelTruth(
                shifts=np.asarray(raw["shifts"], dtype=float),
                function=f,
                sigma=float(raw["sigma"]),
            )
        except (OSError, ValueError, KeyError) as exc:
            raise click.ClickException(f"cannot read truth: {exc}")
    try:
        return CurvePanel(samples=data[:, 1:], design=np.arange(1, n + 1) / n, truth=truth)
    except ValueError as exc:
        raise click.ClickException(str(exc))


def _run_estimate(params: dict, outdir: Path) -> list[str]:
    mode = params["mode"]
    if mode not in ("frechet", "oracle", "naive"):
        raise click.ClickException(f"unknown --mode {mode!r}")
    panel = _read_panel(params["panel"], params.get("truth"))
    cfg = EstimatorConfig(
        k0=params["k0"],
        kappa=params["kappa"],
        eta=params["eta"],
        m1=params["m1"],
        sigma=params["sigma"],
        rsnr=params["rsnr"] if params["sigma"] is None else None,
    )
    theta_out = None
    diagnostics = {}
    try:
        if mode == "frechet":
            est, theta, diag = estimate_mean(panel, cfg)
            theta_out = [float(v) for v in theta.values]
            diagnostics = {
                "converged": diag.registration.converged,
                "iterations": diag.registration.iterations,
                "criterion": diag.registration.criterion,
                "grad_norm": diag.registration.grad_norm,
                "m1": diag.m1,
                "sigma": diag.sigma,
            }
        elif mode == "oracle":
            if panel.truth is None:
                raise click.ClickException("--mode oracle requires --truth")
            est = oracle_mean(panel, panel.truth.shifts, cfg)
            theta_out = [float(v) for v in panel.truth.shifts]
        else:
            est = naive_mean(panel, naive_cutoff(panel, cfg))
    except ValueError as exc:
        raise click.ClickException(str(exc))

    _write_json(
        outdir / "estimate.json",
        {
            "mode": mode,
            "m_hat": est.m,
            "coeffs": [[int(k), float(c.real), float(c.imag)]
                       for k, c in zip(est.k_values, est.coeffs)],
            "theta_hat": theta_out,
            "diagnostics": diagnostics,
        },
    )
    grid = np.arange(RECON_GRID_POINTS) / RECON_GRID_POINTS
    vals = reconstruct(est, grid)
    lines = ["t,value"] + [f"{_fmt(t)},{_fmt(v)}" for t, v in zip(grid, vals)]
    (outdir / "reconstruction.csv").write_text("\n".join(lines) + "\n")
    return ["estimate.json", "reconstruction.csv"]


@main.command("estimate")
@click.option("--panel", required=False, type=click.Path(exists=True))
@click.option("--truth", default=None, type=click.Path(exists=True))
@click.option("--mode", default="frechet", help="frechet|oracle|naive")
@click.option("--k0", type=int, default=5)
@click.option("--kappa", type=float, default=0.125)
@click.option("--eta", type=float, default=2.5)
@click.option("--m1", default="auto")
@click.option("--sigma", type=float, default=None)
@click.option("--rsnr", type=float, default=0.5)
@click.option("--out", default=".")
@click.option("--from-manifest", "from_manifest", default=None, type=click.Path(exists=True))
def cmd_estimate(panel, truth, mode, k0, kappa, eta, m1, sigma, rsnr, out, from_manifest):
    """Estimate the mean curve from a panel CSV (estimate.json + reconstruction.csv)."""
    params = {"panel": panel, "truth": truth, "mode": mode, "k0": k0, "kappa": kappa,
              "eta": eta, "m1": _parse_m1(m1), "sigma": sigma, "rsnr": rsnr, "seed": None}
    if from_manifest:
        params = _load_manifest(from_manifest, "estimate")
    if params["panel"] is None:
        raise click.ClickException("--panel is required")
    outdir = _prepare_outdir(out)
    outputs = _run_estimate(params, outdir)
    _write_manifest(outdir, "estimate", params, outputs)


# -------------------------------------------------------------------- sweep

SWEEP_COLUMNS = (
    "n,J,reps,frechet_risk,frechet_stderr,oracle_risk,oracle_stderr,"
    "naive_risk,naive_stderr,R,shift_mse,nonconv_rate"
)


def _run_sweep(params: dict, outdir: Path) -> list[str]:
    f = _make_function(params["f"])
    try:
        grid = SweepGrid(
            n_values=tuple(params["n_list"]),
            J_values=tuple(params["J_list"]),
            reps=params["reps"],
            base_seed=params["seed"],
            cfg=EstimatorConfig(k0=params["k0"], kappa=params["kappa"], eta=params["eta"],
                                m1=params["m1"], rsnr=params["rsnr"]),
            f=f,
            law=ShiftLaw(kind="uniform", half_width=params["halfwidth"]),
        )
        result = relative_error_sweep(grid)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    lines = [SWEEP_COLUMNS]
    for r in result.records:
        lines.append(",".join(
            [str(r.n), str(r.J), str(r.reps)]
            + [_fmt(v) for v in (
                r.frechet_risk, r.frechet_stderr, r.oracle_risk, r.oracle_stderr,
                r.naive_risk, r.naive_stderr, r.relative_error, r.shift_mse,
                r.nonconv_rate,
            )]
        ))
    (outdir / "sweep.csv").write_text("\n".join(lines) + "\n")
    return ["sweep.csv"]


@main.command("sweep")
@click.option("--f", "fname", default="mixtgauss")
@click.option("--n-list", default="128,256,512")
@click.option("--j-list", "--J-list", "j_list", default="10,20,40")
@click.option("--reps", type=int, default=20)
@click.option("--seed", type=int, default=0)
@click.option("--rsnr", type=float, default=0.5)
@click.option("--halfwidth", type=float, default=1.0 / 16.0)
@click.option("--k0", type=int, default=5)
@click.option("--kappa", type=float, default=0.125)
@click.option("--eta", type=float, default=2.5)
@click.option("--m1", default="auto")
@click.option("--out", default=".")
@click.option("--from-manifest", "from_manifest", default=None, type=click.Path(exists=True))
def cmd_sweep(fname, n_list, j_list, reps, seed, rsnr, halfwidth, k0, kappa, eta, m1,
              out, from_manifest):
    """Relative-error sweep over an (n, J) grid (sweep.csv)."""
    params = {"f": fname, "n_list": _parse_int_list(n_list, "--n-list"),
              "J_list": _parse_int_list(j_list, "--J-list"), "reps": reps, "seed": seed,
              "rsnr": rsnr, "halfwidth": halfwidth, "k0": k0, "kappa": kappa,
              "eta": eta, "m1": _parse_m1(m1)}
    if from_manifest:
        params = _load_manifest(from_manifest, "sweep")
    outdir = _prepare_outdir(out)
    outputs = _run_sweep(params, outdir)
    _write_manifest(outdir, "sweep", params, outputs)


# -------------------------------------------------------------------- rates


def _run_rates(params: dict, outdir: Path) -> list[str]:
    ns = params["n_list"]
    lines = ["n,J,reps,shift_mse,shift_mse_stderr,nonconv_rate"]
    low_confidence = False
    if params["inject"] is not None:
        # self-test mode: fit against y = c / n exactly
        ys = [params["inject"] / n for n in ns]
        for n, y in zip(ns, ys):
            lines.append(f"{n},0,0,{_fmt(y)},{_fmt(0.0)},{_fmt(0.0)}")
        mses = ys
    else:
        f = _make_function(params["f"])
        try:
            records = shift_rate_ladder(
                f,
                ns,
                params["J"],
                ShiftLaw(kind="uniform", half_width=params["halfwidth"]),
                EstimatorConfig(k0=params["k0"], kappa=params["kappa"], rsnr=params["rsnr"]),
                params["reps"],
                params["seed"],
            )
        except ValueError as exc:
            raise click.ClickException(str(exc))
        for r in records:
            lines.append(",".join([str(r.n), str(r.J), str(r.reps),
                                   _fmt(r.mse), _fmt(r.mse_stderr), _fmt(r.nonconv_rate)]))
        mses = [r.mse for r in records]
        low_confidence = any(
            not np.isfinite(r.mse_stderr) or r.mse_stderr > 0.5 * r.mse for r in records
        )
    (outdir / "rates.csv").write_text("\n".join(lines) + "\n")
    try:
        slope, intercept, r2 = rate_slope(ns, mses)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    band = [params["band_lo"], params["band_hi"]]
    _write_json(
        outdir / "summary.json",
        {
            "slope": slope,
            "intercept": intercept,
            "r2": r2,
            "band": band,
            "pass": bool(band[0] <= slope <= band[1]),
            "low_confidence": low_confidence,
        },
    )
    return ["rates.csv", "summary.json"]


@main.command("rates")
@click.option("--f", "fname", default="mixtgauss")
@click.option("--n-list", default="128,256,512,1024,2048")
@click.option("--J", "J", type=int, default=8)
@click.option("--reps", type=int, default=50)
@click.option("--seed", type=int, default=0)
@click.option("--rsnr", type=float, default=0.5)
@click.option("--halfwidth", type=float, default=1.0 / 16.0)
@click.option("--k0", type=int, default=5)
@click.option("--kappa", type=float, default=0.125)
@click.option("--band-lo", type=float, default=-1.35)
@click.option("--band-hi", type=float, default=-0.65)
@click.option("--inject", type=float, default=None,
              help="self-test: fit against y = INJECT / n instead of running")
@click.option("--out", default=".")
@click.option("--from-manifest", "from_manifest", default=None, type=click.Path(exists=True))
def cmd_rates(fname, n_list, J, reps, seed, rsnr, halfwidth, k0, kappa, band_lo, band_hi,
              inject, out, from_manifest):
    """Shift-MSE rate ladder and log-log slope fit (rates.csv + summary.json)."""
    params = {"f": fname, "n_list": _parse_int_list(n_list, "--n-list"), "J": J,
              "reps": reps, "seed": seed, "rsnr": rsnr, "halfwidth": halfwidth,
              "k0": k0, "kappa": kappa, "band_lo": band_lo, "band_hi": band_hi,
              "inject": inject}
    if from_manifest:
        params = _load_manifest(from_manifest, "rates")
    outdir = _prepare_outdir(out)
    outputs = _run_rates(params, outdir)
    _write_manifest(outdir, "rates", params, outputs)


if __name__ == "__main__":
    main()
