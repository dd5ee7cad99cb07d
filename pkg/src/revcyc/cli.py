"""Command-line entry point.

Subcommands::

    revcyc sample      --dim 15 --count 20000 --seed 1 --out ens.jsonl
    revcyc density     --preset fig1 --out fig1.csv
    revcyc spacing     --kind s23 --ensemble ens.jsonl --out s23.csv
    revcyc verify      --dims 3,4,5,15,16 --trials 100
    revcyc oscillator  --n 2 --mode residual --out res.csv

Data files are pure functions of the flags; wall-clock information is kept
in the ``*.manifest.json`` written next to each output.  Exit status is 0
when every embedded check passes, 1 when a check fails, 2 on usage, I/O or
parse errors.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .core import GeneratorVector, to_dense
from .ensemble import EnsembleConfig, sample_generators, stream
from .errors import InsufficientDataError, ParseError, RevcycError
from .laws import AnalyticLaw, LawKind, calibrate_unit_mean, pdf
from .oscillator import (
    McmcConfig,
    OscillatorConfig,
    admissible_points,
    hamiltonian_residual,
    local_energy,
    marginal_report,
    mcmc_ground_state,
)
from .spectral import (
    SpectrumBatch,
    jacobi_eigenvalues_batch,
    jacobian3,
    map_eigen_to_matrix3,
    reconstruct,
    spectrum_batch,
)
from .stats import (
    OBSERVABLE_LAW,
    Observable,
    Pairing,
    build_histogram,
    chi_square_test,
    density_normalize,
    extract_observable,
    ks_test,
)

PRESETS = {
    "fig1": dict(kind="density", dim=15, count=20000, bins=81, range=(-2.5, 2.5)),
    "fig2": dict(kind="s12", dim=15, count=20000, bins=60, range=(0.0, 4.0)),
    "fig3": dict(kind="s23", dim=15, count=20000, bins=60, range=(0.0, 4.0)),
    "fig4": dict(kind="spp", dim=5, count=5000, bins=60, range=(0.0, 2.0)),
}
DEFAULTS = dict(dim=15, stiffness=1.0, count=20000, seed=0, bins=60, threads=1)
KIND_OBSERVABLE = {
    "density": Observable.NONTRIVIAL,
    "trivial": Observable.TRIVIAL,
    "s12": Observable.S12,
    "s23": Observable.S23,
    "spp": Observable.SPP,
}


class CliError(Exception):
    pass


# -- I/O helpers -------------------------------------------------------------


def _open_out(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def _write_json(path: Path, obj) -> None:
    with _open_out(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def _write_manifest(out: Path, command: str, params: dict, outputs: list[Path], started: float) -> Path:
    path = _sidecar(out, ".manifest.json")
    _write_json(
        path,
        {
            "subcommand": command,
            "parameters": params,
            "seed": params.get("seed"),
            "version": __version__,
            "outputs": [str(p) for p in outputs],
            "started_at": _dt.datetime.fromtimestamp(started, _dt.timezone.utc).isoformat(),
            "duration_s": round(time.time() - started, 6),
        },
    )
    return path


def write_ensemble(path: Path, gens: np.ndarray, spectra: SpectrumBatch) -> None:
    with _open_out(path) as fh:
        for i, row in enumerate(gens):
            rec = {
                "gen": row.tolist(),
                "e1": float(spectra.trivial[i]),
                "mags": spectra.magnitudes[i].tolist(),
                "phases": spectra.phases[i].tolist(),
                "even_extra": None if spectra.even_extra is None else float(spectra.even_extra[i]),
            }
            fh.write(json.dumps(rec) + "\n")


def read_ensemble(path: Path) -> tuple[np.ndarray, SpectrumBatch]:
    """Load an ensemble file back into generators and spectra."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    gens, e1, mags, phases, extra = [], [], [], [], []
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                gen = [float(v) for v in rec["gen"]]
                k = (len(gen) - 1) // 2
                m = [float(v) for v in rec["mags"]]
                p = [float(v) for v in rec["phases"]]
                if len(m) != k or len(p) != k:
                    raise ValueError(f"expected {k} magnitudes and phases")
                if gens and len(gen) != len(gens[0]):
                    raise ValueError("matrix order differs from previous records")
                ex = rec["even_extra"]
                if (ex is None) != (len(gen) % 2 == 1):
                    raise ValueError("even_extra must be present iff the order is even")
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(path, lineno, str(exc)) from None
            gens.append(gen)
            e1.append(float(rec["e1"]))
            mags.append(m)
            phases.append(p)
            extra.append(ex)
    if not gens:
        raise ParseError(path, 0, "no records")
    dim = len(gens[0])
    k = (dim - 1) // 2
    batch = SpectrumBatch(
        dim=dim,
        trivial=np.array(e1),
        magnitudes=np.array(mags, dtype=float).reshape(-1, k),
        phases=np.array(phases, dtype=float).reshape(-1, k),
        even_extra=None if dim % 2 else np.array(extra, dtype=float),
    )
    return np.array(gens), batch


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like lo:hi, got {text!r}") from None
    if not hi > lo:
        raise argparse.ArgumentTypeError("range needs hi > lo")
    return lo, hi


def _fmt(x: float) -> str:
    return repr(float(x))


# -- subcommands -------------------------------------------------------------


def _resolve(args, keys) -> dict:
    preset = PRESETS.get(args.preset, {}) if getattr(args, "preset", None) else {}
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is None:
            v = preset.get(k, DEFAULTS.get(k))
        out[k] = v
    return out


def _ensemble_config(p: dict) -> EnsembleConfig:
    try:
        return EnsembleConfig(dim=p["dim"], stiffness=p["stiffness"], count=p["count"], seed=p["seed"])
    except RevcycError as exc:
        raise CliError(str(exc)) from None


def cmd_sample(args) -> int:
    started = time.time()
    p = _resolve(args, ["dim", "stiffness", "count", "seed", "threads"])
    cfg = _ensemble_config(p)
    gens = sample_generators(cfg, threads=p["threads"])
    out = Path(args.out)
    write_ensemble(out, gens, spectrum_batch(gens))
    p.pop("threads")
    _write_manifest(out, "sample", p, [out], started)
    return 0


def _histogram_command(args, kind: str) -> int:
    started = time.time()
    p = _resolve(args, ["dim", "stiffness", "count", "seed", "bins", "range", "threads"])
    observable = KIND_OBSERVABLE[kind]
    pairing = Pairing(args.pairing)
    if args.ensemble:
        gens, spectra = read_ensemble(Path(args.ensemble))
        source = {"ensemble": str(args.ensemble)}
        stiffness = p["stiffness"]
    else:
        cfg = _ensemble_config(p)
        spectra = spectrum_batch(sample_generators(cfg, threads=p["threads"]))
        source = {k: p[k] for k in ("dim", "count", "seed")}
        stiffness = cfg.stiffness

    values = extract_observable(spectra, observable, pairing)
    if values.size == 0:
        raise InsufficientDataError(f"{kind} needs at least two nontrivial magnitudes per matrix")
    law = AnalyticLaw(OBSERVABLE_LAW[observable], stiffness)
    if args.calibrate_mean:
        if observable not in (Observable.S12, Observable.S23, Observable.SPP):
            raise CliError("--calibrate-mean applies to spacing observables only")
        values = values / values.mean()
        law = AnalyticLaw(law.kind, calibrate_unit_mean(law.kind))

    hist = build_histogram(values, p["bins"], p["range"])
    rows = density_normalize(hist, 1.0, include_outliers=True)
    analytic = np.asarray(pdf(law, hist.centers)) / law.total_mass

    out = Path(args.out)
    with _open_out(out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_center", "bin_width", "empirical_density", "analytic_density"])
        for (c, d), width, a in zip(rows, hist.widths, analytic):
            w.writerow([_fmt(c), _fmt(width), _fmt(d), _fmt(a)])

    report = ks_test(values, law, args.ks_threshold)
    try:
        chi = chi_square_test(hist, law)
        report.chi2_statistic, report.chi2_pvalue, report.dof = chi.chi2_statistic, chi.chi2_pvalue, chi.dof
    except InsufficientDataError:
        pass
    report.label = kind + (f" ({pairing.value})" if observable is Observable.SPP else "")
    report.extra = {
        "stiffness": law.stiffness,
        "calibrated_mean": bool(args.calibrate_mean),
        "pairing": pairing.value,
        "underflow": hist.underflow,
        "overflow": hist.overflow,
        "mean": float(values.mean()),
        **source,
    }
    report_path = _sidecar(out, ".report.json")
    _write_json(report_path, report.to_dict())
    params = dict(p, kind=kind, pairing=pairing.value, calibrate_mean=bool(args.calibrate_mean),
                  ensemble=args.ensemble, preset=args.preset, ks_threshold=args.ks_threshold)
    params.pop("threads")
    params["range"] = list(p["range"]) if p["range"] else None
    _write_manifest(out, kind, params, [out, report_path], started)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0 if report.passed else 1


def cmd_density(args) -> int:
    return _histogram_command(args, "density")


def cmd_spacing(args) -> int:
    kind = args.kind or PRESETS.get(args.preset, {}).get("kind")
    if kind not in ("s12", "s23", "spp"):
        raise CliError("spacing needs --kind s12|s23|spp (or a fig2..fig4 preset)")
    return _histogram_command(args, kind)


def verify_report(dims: list[int], trials: int, seed: int) -> dict:
    """Round-trip, oracle and Jacobian checks as a machine-readable report."""
    checks = []

    def add(name, dim, err, tol):
        checks.append(dict(name=name, dim=dim, max_error=float(err), tolerance=tol, passed=bool(err < tol)))

    for dim in dims:
        cfg = EnsembleConfig(dim=dim, stiffness=1.0, count=trials, seed=seed)
        gens = sample_generators(cfg)
        spectra = spectrum_batch(gens)
        idx = (np.arange(dim)[:, None] + np.arange(dim)[None, :]) % dim
        oracle = jacobi_eigenvalues_batch(gens[:, idx])
        add("oracle", dim, np.max(np.abs(oracle - spectra.sorted_eigenvalues())), 1e-9)
        rec = max(
            np.max(np.abs(reconstruct(s).values - to_dense(GeneratorVector(tuple(g))).values))
            for g, s in zip(gens, spectra)
        )
        add("reconstruction", dim, rec, 1e-10)
        if dim == 2:
            closed = np.sort(np.stack([gens.sum(1), gens[:, 0] - gens[:, 1]], axis=1), axis=1)
            add("closed_form_2x2", dim, np.max(np.abs(closed - oracle)), 1e-12)
        if dim == 3:
            rng = stream(seed, 3)
            worst = 0.0
            for _ in range(50):
                e1, m, th = rng.normal(), rng.uniform(0.1, 3.0), rng.uniform(0, 2 * math.pi)
                an = jacobian3(e1, m, th)
                worst = max(worst, abs(jacobian3(e1, m, th, numeric=True) - an) / an)
            add("jacobian3", dim, worst, 1e-6)
            rng = stream(seed, 4)
            worst = 0.0
            for _ in range(trials):
                e1, m, th = rng.normal(), rng.uniform(0.1, 3.0), rng.uniform(0, 2 * math.pi)
                s = spectrum_batch(np.array([map_eigen_to_matrix3(e1, m, th).entries]))
                dth = abs((s.phases[0, 0] - th + math.pi) % (2 * math.pi) - math.pi)
                worst = max(worst, abs(s.trivial[0] - e1), abs(s.magnitudes[0, 0] - m), dth)
            add("map3_roundtrip", dim, worst, 1e-10)
    return {"checks": checks, "passed": all(c["passed"] for c in checks)}


def cmd_verify(args) -> int:
    started = time.time()
    dims = [int(d) for d in args.dims.split(",")]
    if any(d < 2 for d in dims):
        raise CliError("dims must be >= 2")
    report = verify_report(dims, args.trials, args.seed)
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = Path(args.out)
        _write_json(out, report)
        _write_manifest(out, "verify", dict(dims=dims, trials=args.trials, seed=args.seed), [out], started)
    return 0 if report["passed"] else 1


def cmd_oscillator(args) -> int:
    started = time.time()
    mcmc = McmcConfig(
        steps=args.steps,
        burn_in=args.burn_in,
        thinning=args.thinning,
        proposal_std=args.proposal_std,
        seed=args.seed,
        chains=args.chains,
    )
    try:
        cfg = OscillatorConfig(
            n=args.n, stiffness=args.stiffness, fd_step=args.fd_step,
            exclusion_radius=args.exclusion_radius, mcmc=mcmc, harmonic=args.harmonic,
        )
    except RevcycError as exc:
        raise CliError(str(exc)) from None
    params = dict(vars(args))
    params.pop("func", None)
    out = Path(args.out) if args.out else None

    if args.mode == "residual":
        pts = admissible_points(cfg, args.points, seed=args.seed)
        rows = []
        for x in pts:
            e = local_energy(x, cfg)
            rows.append((x, e, hamiltonian_residual(x, cfg)))
        passed = all(r < args.tolerance for _, _, r in rows)
        summary = {
            "mode": "residual",
            "energy": cfg.energy,
            "max_residual": max(r for _, _, r in rows),
            "tolerance": args.tolerance,
            "passed": passed,
        }
        if out:
            with _open_out(out) as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow([f"x{i + 1}" for i in range(cfg.n)] + ["local_energy", "target", "residual"])
                for x, e, r in rows:
                    w.writerow([_fmt(v) for v in x] + [_fmt(e), _fmt(cfg.energy), _fmt(r)])
    else:
        res = mcmc_ground_state(cfg)
        reports = marginal_report(res.samples, cfg, args.ks_threshold)
        passed = all(r.passed for r in reports)
        summary = {
            "mode": "mcmc",
            "acceptance_rate": res.acceptance_rate,
            "samples": int(res.samples.shape[0]),
            "reports": [r.to_dict() for r in reports],
            "passed": passed,
        }
        if out:
            _write_json(out, summary)
    print(json.dumps(summary, sort_keys=True))
    if out:
        _write_manifest(out, "oscillator", params, [out], started)
    return 0 if passed else 1


# -- parser ------------------------------------------------------------------


def _add_ensemble_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, help="matrix order N (default 15)")
    p.add_argument("--stiffness", type=float, help="weight parameter A (default 1)")
    p.add_argument("--count", type=int, help="number of matrices (default 20000)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--threads", type=int, help="sampling threads; never changes output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="revcyc", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample an ensemble to a JSON-lines file")
    _add_ensemble_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    for name, func in (("density", cmd_density), ("spacing", cmd_spacing)):
        p = sub.add_parser(name, help=f"{name} histogram vs the analytic law")
        _add_ensemble_flags(p)
        if name == "spacing":
            p.add_argument("--kind", choices=["s12", "s23", "spp"])
        p.add_argument("--ensemble", help="read spectra from a sample file instead of sampling")
        p.add_argument("--bins", type=int)
        p.add_argument("--range", type=_parse_range, help="lo:hi")
        p.add_argument("--calibrate-mean", action="store_true", help="rescale spacings to unit mean")
        p.add_argument("--pairing", choices=[x.value for x in Pairing], default="all-pairs")
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--ks-threshold", type=float, default=0.02)
        p.add_argument("--out", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="closed-form spectra vs dense oracle")
    p.add_argument("--dims", default="3,4,5,15,16")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oscillator", help="ground-state checks of the screened oscillator")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--stiffness", type=float, default=1.0)
    p.add_argument("--mode", choices=["residual", "mcmc"], default="residual")
    p.add_argument("--harmonic", type=int, default=1, help="2 = even-order extrapolation")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--fd-step", type=float, default=1e-3)
    p.add_argument("--exclusion-radius", type=float, default=0.05)
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.add_argument("--steps", type=int, default=20_000)
    p.add_argument("--burn-in", type=int, default=2_000)
    p.add_argument("--thinning", type=int, default=20)
    p.add_argument("--chains", type=int, default=100)
    p.add_argument("--proposal-std", type=float)
    p.add_argument("--ks-threshold", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oscillator)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, RevcycError) as exc:
        print(f"revcyc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
