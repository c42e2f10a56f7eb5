"""Command-line front end: reproducible experiments from JSON configs.

Every run reads a single JSON config, writes CSV/JSON outputs into the
output directory and emits a ``manifest.json`` recording the subcommand, a
digest of the config bytes, the effective seed, the tool version and a
timestamp.  CSV outputs are byte-identical across repeated runs with the
same config and seed on one platform and release.

Exit codes: 0 success, 2 malformed config, 3 singular Gram matrix,
4 spectral support mismatch (orthogonality), 5 optimization failure rate
above 20%.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .designs import (
    dyadic_interval_designs,
    equispaced_interval_design,
    fibonacci_sphere_designs,
    sphere_sequence,
)
from .divergence import dichotomy_diagnostic, j_divergence_trace, trace_to_csv, trace_to_json
from .errors import AtomMismatchError, ContractError, SingularGramError
from .kernels import Design, SchoenbergSpectrum, gram, kernel_from_json
from .mle import ExperimentConfig, OptimizerConfig, microergodic_experiment, report_to_csv
from .sampler import batch_to_csv, sample_paths
from .spectral import (
    AtomicSpectralMeasure,
    CriterionResult,
    chow_sum,
    ratio_model_from_json,
    spectra_from_ratio_model,
    sphere_equivalence_sum,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SINGULAR = 3
EXIT_ATOM_MISMATCH = 4
EXIT_OPTIMIZATION = 5


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    config_digest: str
    seed: int | None
    tool_version: str
    timestamp: str

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(self.__dict__, indent=2) + "\n")


def _fail(msg: str, code: int) -> int:
    print(f"gaussequiv: error: {msg}", file=sys.stderr)
    return code


def _design_from_config(obj: dict) -> Design:
    kind = obj["type"]
    if kind == "equispaced_interval":
        return equispaced_interval_design(int(obj["n"]), tuple(obj.get("domain", (0.0, 1.0))))
    if kind == "dyadic_interval":
        return dyadic_interval_designs(int(obj["n"]), tuple(obj.get("domain", (0.0, 1.0))))[-1]
    if kind == "fibonacci_sphere":
        d = int(obj.get("sphere_dim", 3))
        return Design.on_sphere(sphere_sequence(int(obj["n"]), d))
    if kind == "explicit":
        return Design.from_json(obj)
    raise ContractError(f"unknown design type {kind!r}")


def _nested_designs_from_config(obj: dict) -> list[Design]:
    kind = obj["type"]
    if kind == "dyadic_interval":
        return dyadic_interval_designs(int(obj["max_n"]), tuple(obj.get("domain", (0.0, 1.0))))
    if kind == "fibonacci_sphere":
        d = int(obj.get("sphere_dim", 3))
        return fibonacci_sphere_designs([int(s) for s in obj["sizes"]], d)
    raise ContractError(f"unknown nested design type {kind!r}")


def _write_criterion_csv(path: Path, index_name: str, result: CriterionResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([index_name, "term", "partial_sum"])
        for i, t, p in zip(result.indices, result.terms, result.partial_sums):
            w.writerow([int(i), repr(float(t)), repr(float(p))])


def _criterion_verdict_json(result: CriterionResult, extra: dict) -> dict:
    out = {
        "verdict": result.verdict.value,
        "final": result.final,
        "tail_bound": result.tail_bound,
    }
    out.update(extra)
    return out


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------


def _run_jdiv(config: dict, outdir: Path, seed, args) -> int:
    k1 = kernel_from_json(config["kernel1"])
    k2 = kernel_from_json(config["kernel2"])
    designs = _nested_designs_from_config(config["designs"])
    if len(designs) < 4:
        raise ContractError("jdiv needs at least 4 nested designs for the verdict rule")
    trace = j_divergence_trace(k1, k2, designs)
    verdict = dichotomy_diagnostic(trace)
    trace_to_csv(trace, outdir / "trace.csv")
    (outdir / "verdict.json").write_text(json.dumps(trace_to_json(trace, verdict), indent=2) + "\n")
    return EXIT_OK


def _run_sphere(config: dict, outdir: Path, seed, args) -> int:
    d = int(config["sphere_dim"])
    last_k = int(config["K"])
    model = ratio_model_from_json(config["ratio_model"]) if "ratio_model" in config else None
    if "spectrum1" in config or "spectrum2" in config:
        s1 = SchoenbergSpectrum(d, np.asarray(config["spectrum1"], dtype=float))
        s2 = SchoenbergSpectrum(d, np.asarray(config["spectrum2"], dtype=float))
    elif model is not None:
        s1, s2 = spectra_from_ratio_model(model, d, last_k)
    else:
        raise ContractError("config must provide explicit spectra or a ratio_model")
    result = sphere_equivalence_sum(s1, s2, last_k, tail_model=model)
    _write_criterion_csv(outdir / "criterion.csv", "k", result)
    payload = _criterion_verdict_json(result, {"sphere_dim": d, "K": last_k})
    (outdir / "verdict.json").write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def _run_chow(config: dict, outdir: Path, seed, args) -> int:
    base = Path(args.config).resolve().parent
    m1 = AtomicSpectralMeasure.from_json(json.loads((base / config["measure1"]).read_text()))
    m2 = AtomicSpectralMeasure.from_json(json.loads((base / config["measure2"]).read_text()))
    n_atoms = int(config["N"])
    model = ratio_model_from_json(config["ratio_model"]) if "ratio_model" in config else None
    weight_bound = config.get("weight_bound")
    result = chow_sum(m1, m2, n_atoms, tail_model=model, tail_weight_bound=weight_bound)
    _write_criterion_csv(outdir / "criterion.csv", "n", result)
    payload = _criterion_verdict_json(result, {"N": n_atoms})
    (outdir / "verdict.json").write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def _run_sample(config: dict, outdir: Path, seed, args) -> int:
    if seed is None:
        raise ContractError("sample requires a seed (config key 'seed' or --seed)")
    kernel = kernel_from_json(config["kernel"])
    design = _design_from_config(config["design"])
    m = int(config["replicates"])
    batch = sample_paths(gram(kernel, design), m, int(seed), design)
    batch_to_csv(batch, outdir / "samples.csv")
    sidecar = {
        "seed": batch.seed,
        "kernel": config["kernel"],
        "design": design.to_json(),
        "replicates": m,
    }
    (outdir / "sample_meta.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return EXIT_OK


def _run_mle(config: dict, outdir: Path, seed, args) -> int:
    if seed is None:
        raise ContractError("mle requires a seed (config key 'seed' or --seed)")
    opt_cfg = config.get("optimizer", {})
    optimizer = OptimizerConfig(
        starts=int(opt_cfg.get("starts", 5)),
        tol_x=float(opt_cfg.get("tol_x", 1e-6)),
        tol_f=float(opt_cfg.get("tol_f", 1e-9)),
        max_evals=int(opt_cfg.get("max_evals", 2000)),
        transform=str(opt_cfg.get("transform", "log")),
    )
    box = config.get("box", [[0.05, 0.05], [20.0, 20.0]])
    exp_config = ExperimentConfig(
        n_grid=tuple(int(n) for n in config["n_grid"]),
        replicates=int(config["replicates"]),
        seed=int(seed),
        theta0=tuple(float(t) for t in config.get("theta0", (1.0, 1.0))),
        domain=tuple(float(t) for t in config.get("domain", (0.0, 1.0))),
        box_lower=tuple(float(t) for t in box[0]),
        box_upper=tuple(float(t) for t in box[1]),
        optimizer=optimizer,
        workers=max(1, int(args.threads)),
    )
    report = microergodic_experiment(exp_config)
    report_to_csv(report, outdir / "consistency.csv")
    attempted = report.replicates * len(report.n_grid)
    if sum(report.failed) > 0.2 * attempted:
        return _fail(
            f"optimization failed for {sum(report.failed)} of {attempted} replicates",
            EXIT_OPTIMIZATION,
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

_EPILOGS = {
    "jdiv": """\
config keys:
  kernel1, kernel2   kernel descriptions, e.g. {"variant": "brownian", "sigma": 1.0},
                     {"variant": "exponential", "sigma": 1.0, "beta": 1.0} or
                     {"variant": "schoenberg", "d": 3, "coeffs": [...]}
  designs            nested design generator, one of
                     {"type": "dyadic_interval", "max_n": 128, "domain": [0, 1]}
                     {"type": "fibonacci_sphere", "sizes": [20, 40, 80], "sphere_dim": 3}
outputs: trace.csv (n,J,slope_estimate), verdict.json, manifest.json""",
    "sphere": """\
config keys:
  sphere_dim         ambient dimension d >= 3
  K                  last degree of the partial sum
  spectrum1,
  spectrum2          explicit coefficient lists (optional when ratio_model given)
  ratio_model        closed-form tail model, {"type": "power", "c": 1.0, "s": 2.0}
                     or {"type": "constant", "alpha": 4.0}; when spectra are
                     omitted it also generates them (a2 = 1, a1 = ratio)
outputs: criterion.csv (k,term,partial_sum), verdict.json, manifest.json""",
    "chow": """\
config keys:
  measure1, measure2 paths to atomic-measure JSON files, relative to the config;
                     format {"atoms": [{"label": "k0", "mass": 1.0, "dim": 1}, ...]}
  N                  number of leading atoms to sum
  ratio_model        optional closed-form tail model (see sphere)
  weight_bound       optional bound on atom dimensions beyond N (default: max seen)
outputs: criterion.csv (n,term,partial_sum), verdict.json, manifest.json""",
    "sample": """\
config keys:
  kernel             kernel description (see jdiv)
  design             one of {"type": "equispaced_interval", "n": 8, "domain": [0, 1]},
                     {"type": "dyadic_interval", "n": 8, "domain": [0, 1]},
                     {"type": "fibonacci_sphere", "n": 20, "sphere_dim": 3},
                     {"type": "explicit", "geometry": {...}, "points": [[...], ...]}
  replicates         number of rows to draw
  seed               unsigned generator seed (--seed overrides)
outputs: samples.csv (one replicate per row), sample_meta.json, manifest.json""",
    "mle": """\
config keys:
  n_grid             strictly increasing grid sizes, e.g. [50, 100, 200, 400]
  replicates         replicates per grid size (>= 20)
  seed               unsigned base seed (--seed overrides)
  theta0             true (sigma, beta), default [1.0, 1.0]
  domain             observation interval, default [0.0, 1.0]
  box                parameter box [[lo_sigma, lo_beta], [hi_sigma, hi_beta]],
                     default [[0.05, 0.05], [20.0, 20.0]]
  optimizer          optional overrides: starts, tol_x, tol_f, max_evals, transform
outputs: consistency.csv (n,rmse_sigma2,rmse_beta,rmse_microergodic,failed_replicates),
         manifest.json""",
}

_HANDLERS = {
    "jdiv": _run_jdiv,
    "sphere": _run_sphere,
    "chow": _run_chow,
    "sample": _run_sample,
    "mle": _run_mle,
}

_HELP = {
    "jdiv": "divergence trace of two kernels along nested designs, with verdict",
    "sphere": "spherical-spectrum equivalence criterion sum",
    "chow": "dimension-weighted atom criterion sum for two atomic measures",
    "sample": "draw seeded Gaussian replicates for a kernel on a design",
    "mle": "microergodic ML consistency experiment for the exponential kernel",
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussequiv",
        description="Equivalence vs. orthogonality experiments for centered Gaussian processes.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, handler in _HANDLERS.items():
        p = sub.add_parser(
            name,
            help=_HELP[name],
            epilog=_EPILOGS[name],
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default=".", help="output directory (default: current directory)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads for replicate fits")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config_bytes = Path(args.config).read_bytes()
        config = json.loads(config_bytes)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(f"cannot read config: {exc}", EXIT_CONFIG)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else config.get("seed")
    manifest = RunManifest(
        subcommand=args.subcommand,
        config_digest=hashlib.sha256(config_bytes).hexdigest(),
        seed=int(seed) if seed is not None else None,
        tool_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )
    manifest.write(outdir / "manifest.json")
    try:
        return args.handler(config, outdir, seed, args)
    except (ContractError, KeyError, TypeError, ValueError) as exc:
        return _fail(f"invalid config: {exc}", EXIT_CONFIG)
    except OSError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    except SingularGramError as exc:
        return _fail(str(exc), EXIT_SINGULAR)
    except AtomMismatchError as exc:
        return _fail(str(exc), EXIT_ATOM_MISMATCH)


if __name__ == "__main__":
    raise SystemExit(main())
