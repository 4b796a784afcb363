"""Reproducible experiment runner emitting CSV.

All experiments share one schema::

    experiment,N,alpha,beta,h,t,quantity,value,method,seed

so golden-file tests and plotting scripts need a single parser.  Values are
written with 17 significant digits, rows are sorted deterministically, and
line endings are LF, so identical configs produce byte-identical files.

The ``t`` column holds the evolution time, the literal ``avg`` for
time-averaged rows, or the step count for ``sample`` rows.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass, replace

import numpy as np

from .bottleneck import marked_state_bound
from .chain import (
    build_transition_matrix,
    exact_mixing_time,
    make_chain,
    sample_chain,
    total_variation,
)
from .errors import BudgetExceeded, NoConvergence, NonConvergence
from .model import MarkedStateHamiltonian, gibbs_measure
from .quantum import (
    GROVER,
    TRANSVERSE,
    MixerSpec,
    quantum_kernel,
    quantum_proposal_column,
    resonance_field,
    structured_grover_kernel,
)
from .spectral import (
    AveragingScheme,
    averaged_grover_gap,
    grover_gap_closed_form,
    scaling_fit,
    spectral_gap_dense,
    time_averaged_kernel,
)
from . import validation

_HEADER = "experiment,N,alpha,beta,h,t,quantity,value,method,seed"

_DEFAULTS = {
    "figure-a": {"mixer": GROVER, "h": "resonance", "t": "2:20"},
    "figure-b": {"mixer": TRANSVERSE, "h": "1", "t": "1"},
    "scan": {"mixer": GROVER, "h": "resonance", "t": "0.3"},
    "sample": {"mixer": GROVER, "h": "resonance", "t": "0.3"},
    "validate": {"mixer": GROVER, "h": "1", "t": "1"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_min: int = 10
    n_max: int = 20
    alpha: float = 1.0
    beta: float = 5.0
    mixer: str = GROVER
    h: str = "resonance"          # float literal | "resonance" | "lo:hi"
    t: str = "1"                  # float literal | "lo:hi"
    avg_samples: int = 64
    seed: int = 0
    out: str = "-"
    max_dense_n: int = 12
    steps: int = 2000

    def __post_init__(self):
        if self.experiment not in _DEFAULTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.n_min < 1 or self.n_max < self.n_min:
            raise ValueError(f"empty N range {self.n_min}..{self.n_max}")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.mixer not in (GROVER, TRANSVERSE):
            raise ValueError(f"unknown mixer {self.mixer!r}")
        if self.avg_samples < 1:
            raise ValueError("avg-samples must be >= 1")
        _parse_spec(self.h, allow_resonance=True)
        _parse_spec(self.t, allow_resonance=False)

    @property
    def n_values(self):
        return range(self.n_min, self.n_max + 1)


def _parse_spec(text: str, allow_resonance: bool):
    """A value spec is a float, ``lo:hi``, or (for h) ``resonance``."""
    if text == "resonance":
        if not allow_resonance:
            raise ValueError("'resonance' is only valid for --h")
        return "resonance"
    if ":" in text:
        lo, hi = (float(part) for part in text.split(":", 1))
        if not hi >= lo:
            raise ValueError(f"empty range {text!r}")
        return (lo, hi)
    return float(text)


def _resolve_h(cfg: ExperimentConfig, n: int):
    spec = _parse_spec(cfg.h, allow_resonance=True)
    if spec == "resonance":
        return resonance_field(cfg.alpha, n)
    return spec


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def _emit(rows) -> str:
    lines = sorted(",".join(_fmt(f) for f in row) for row in rows)
    return _HEADER + "\n" + "\n".join(lines) + "\n"


def _skip(quantity, n, exc):
    print(f"skipped {quantity} at N={n}: {exc}", file=sys.stderr)


# ---------------------------------------------------------------------------
# experiments

def run_figure_a(cfg: ExperimentConfig):
    """Time-averaged grover-chain gap per N: closed-form average for all N,
    dense averaged-kernel eigensolve as a cross-check at small N."""
    t_spec = _parse_spec(cfg.t, allow_resonance=False)
    t_range = t_spec if isinstance(t_spec, tuple) else (t_spec, t_spec)
    rows = []
    for n in cfg.n_values:
        h = _resolve_h(cfg, n)
        if isinstance(h, tuple):
            scheme = AveragingScheme(t_range, h_range=h,
                                     sample_count=cfg.avg_samples)
            h_label = "%.17g:%.17g" % h
        else:
            scheme = AveragingScheme(t_range, h_fixed=h,
                                     sample_count=cfg.avg_samples)
            h_label = _fmt(h)
        gap = averaged_grover_gap(n, cfg.alpha, cfg.beta, scheme)
        rows.append(("figure-a", n, cfg.alpha, cfg.beta, h_label, "avg",
                     "delta_closed", gap, "closed-form-average", cfg.seed))
        if n <= cfg.max_dense_n:
            h_c = MarkedStateHamiltonian(n, cfg.alpha)
            kern = time_averaged_kernel(h_c, GROVER, scheme)
            try:
                p = build_transition_matrix(kern, gibbs_measure(h_c, cfg.beta))
                delta = spectral_gap_dense(p, max_n=cfg.max_dense_n).delta
            except BudgetExceeded as exc:
                _skip("delta_exact", n, exc)
                continue
            rows.append(("figure-a", n, cfg.alpha, cfg.beta, h_label, "avg",
                         "delta_exact", delta, "dense-eigensolve", cfg.seed))
    return rows


def run_figure_b(cfg: ExperimentConfig):
    """Transverse-field chain: marked-state bound for all N, exact dense gap
    where the eigensolve is affordable."""
    t_spec = _parse_spec(cfg.t, allow_resonance=False)
    if isinstance(t_spec, tuple):
        raise ValueError("figure-b expects a fixed t")
    rows = []
    for n in cfg.n_values:
        h = _resolve_h(cfg, n)
        if isinstance(h, tuple):
            raise ValueError("figure-b expects a fixed h")
        h_c = MarkedStateHamiltonian(n, cfg.alpha)
        mixer = MixerSpec(TRANSVERSE, h)
        try:
            col = quantum_proposal_column(h_c, mixer, t_spec, h_c.marked)
        except (NonConvergence, BudgetExceeded) as exc:
            _skip("bound", n, exc)
            continue
        bound = marked_state_bound(col, n, cfg.alpha, cfg.beta, h_c.marked)
        rows.append(("figure-b", n, cfg.alpha, cfg.beta, h, t_spec,
                     "bound", bound, "marked-state-cut", cfg.seed))
        if n <= cfg.max_dense_n:
            kern = quantum_kernel(h_c, mixer, t_spec)
            p = build_transition_matrix(kern, gibbs_measure(h_c, cfg.beta))
            delta = spectral_gap_dense(p, max_n=cfg.max_dense_n).delta
            rows.append(("figure-b", n, cfg.alpha, cfg.beta, h, t_spec,
                         "delta_exact", delta, "dense-eigensolve", cfg.seed))
    return rows


def run_scan(cfg: ExperimentConfig):
    """Closed-form grover gap over the N range plus a log2 scaling slope."""
    t_spec = _parse_spec(cfg.t, allow_resonance=False)
    if isinstance(t_spec, tuple):
        raise ValueError("scan expects a fixed t")
    rows = []
    points = []
    for n in cfg.n_values:
        h = _resolve_h(cfg, n)
        if isinstance(h, tuple):
            raise ValueError("scan expects a fixed h")
        gap = grover_gap_closed_form(n, cfg.alpha, cfg.beta, h, t_spec)
        rows.append(("scan", n, cfg.alpha, cfg.beta, h, t_spec,
                     "delta_closed", gap, "closed-form", cfg.seed))
        points.append((n, gap))
    if len(points) >= 4:
        slope = scaling_fit(points)
        rows.append(("scan", cfg.n_max, cfg.alpha, cfg.beta, cfg.h, t_spec,
                     "slope", slope, "least-squares", cfg.seed))
    return rows


def run_sample(cfg: ExperimentConfig):
    """Finite-sample chain runs: empirical total variation at checkpoints and
    the exact mixing time, for every N where the target fits in memory."""
    t_spec = _parse_spec(cfg.t, allow_resonance=False)
    if isinstance(t_spec, tuple):
        raise ValueError("sample expects a fixed t")
    checkpoints = sorted({max(1, cfg.steps * k // 4) for k in range(1, 5)})
    rows = []
    for n in cfg.n_values:
        if n > cfg.max_dense_n:
            _skip("tv", n, f"dense target limited to N <= {cfg.max_dense_n}")
            continue
        h = _resolve_h(cfg, n)
        h_c = MarkedStateHamiltonian(n, cfg.alpha)
        if cfg.mixer == GROVER:
            kern = structured_grover_kernel(h_c, h, t_spec)
        else:
            kern = quantum_kernel(h_c, MixerSpec(TRANSVERSE, h), t_spec)
        measure = gibbs_measure(h_c, cfg.beta)
        pi = measure.probabilities()
        state = make_chain(start=(h_c.marked + 1) % h_c.dim, seed=cfg.seed)
        visited = sample_chain(state, kern, measure, cfg.steps)
        for stop in checkpoints:
            counts = np.bincount(visited[:stop], minlength=h_c.dim)
            tv = total_variation(counts / stop, pi)
            rows.append(("sample", n, cfg.alpha, cfg.beta, h, stop,
                         "tv", tv, "empirical", cfg.seed))
        p = build_transition_matrix(kern, measure)
        t_mix = exact_mixing_time(p, 0.01)
        rows.append(("sample", n, cfg.alpha, cfg.beta, h, t_spec,
                     "tmix", t_mix, "exact", cfg.seed))
    return rows


def _figure_determinism(cfg: ExperimentConfig):
    """Byte-identical CSV from two reduced figure runs with the same seed."""
    probe = replace(cfg, experiment="figure-a", mixer=GROVER, h="resonance",
                    t="2:20", n_min=10, n_max=14, avg_samples=16,
                    max_dense_n=10)
    first = _emit(run_figure_a(probe))
    second = _emit(run_figure_a(probe))
    mismatch = 0.0 if first == second else 1.0
    return validation.CriterionResult("figure-determinism", mismatch, 0.0,
                                      mismatch == 0.0)


def run_validate(cfg: ExperimentConfig):
    """Reduced acceptance checks as data rows; verdicts drive the exit code."""
    results = validation.default_suite(reduced=True)
    results.append(_figure_determinism(cfg))
    rows = []
    for res in results:
        verdict = "pass" if res.passed else "fail"
        rows.append(("validate", cfg.n_max, cfg.alpha, cfg.beta, cfg.h, cfg.t,
                     res.criterion, res.value, verdict, cfg.seed))
    return rows


_RUNNERS = {
    "figure-a": run_figure_a,
    "figure-b": run_figure_b,
    "scan": run_scan,
    "sample": run_sample,
    "validate": run_validate,
}


# ---------------------------------------------------------------------------
# argument handling

def _read_config_file(path: str) -> dict:
    options = {}
    with open(path) as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            options[key.replace("-", "_")] = value
    return options


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qemcmc",
        description="Spectral-gap experiments for marked-state Gibbs samplers.",
    )
    parser.add_argument("--experiment", required=True,
                        choices=sorted(_RUNNERS))
    parser.add_argument("--config", help="key=value file; flags override it")
    parser.add_argument("--n-min", type=int, default=None)
    parser.add_argument("--n-max", type=int, default=None)
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--mixer", choices=(GROVER, TRANSVERSE), default=None)
    parser.add_argument("--h", default=None,
                        help="field strength: float, lo:hi, or 'resonance'")
    parser.add_argument("--t", default=None, help="evolution time: float or lo:hi")
    parser.add_argument("--avg-samples", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output path, '-' for stdout")
    parser.add_argument("--max-dense-n", type=int, default=None)
    parser.add_argument("--steps", type=int, default=None)
    return parser


def build_config(argv=None) -> ExperimentConfig:
    args = _build_parser().parse_args(argv)
    options = dict(_DEFAULTS[args.experiment])
    if args.config:
        options.update(_read_config_file(args.config))
    for key in ("n_min", "n_max", "alpha", "beta", "mixer", "h", "t",
                "avg_samples", "seed", "out", "max_dense_n", "steps"):
        value = getattr(args, key)
        if value is not None:
            options[key] = value
    fields = ExperimentConfig.__dataclass_fields__
    unknown = set(options) - set(fields)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    # config-file values arrive as strings; coerce through the field defaults
    coerced = {}
    for key, value in options.items():
        default = fields[key].default
        if isinstance(default, bool):
            coerced[key] = value in (True, "true", "1")
        elif isinstance(default, int) and not isinstance(value, bool):
            coerced[key] = int(value)
        elif isinstance(default, float):
            coerced[key] = float(value)
        else:
            coerced[key] = str(value)
    return ExperimentConfig(experiment=args.experiment, **coerced)


def run(cfg: ExperimentConfig) -> tuple[str, int]:
    rows = _RUNNERS[cfg.experiment](cfg)
    csv_text = _emit(rows)
    status = 0
    if cfg.experiment == "validate" and any(
            row[8] == "fail" for row in rows):
        status = 1
    return csv_text, status


def main(argv=None) -> int:
    try:
        cfg = build_config(argv)
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        csv_text, status = run(cfg)
    except (ValueError, NoConvergence) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if cfg.out == "-":
        sys.stdout.write(csv_text)
    else:
        with io.open(cfg.out, "w", newline="") as handle:
            handle.write(csv_text)
    return status


if __name__ == "__main__":
    sys.exit(main())
