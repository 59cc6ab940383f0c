"""Seeded Monte Carlo campaigns with closed-form oracle comparison.

Trial ``i`` draws everything from ``RngStream(seed, i)``, so results do not
depend on how trials are scheduled across workers. Aggregation always runs in
trial-index order.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import NamedTuple

import numpy as np

from . import circuits, finalstate, linalg, randsrc, stats
from .finalstate import ProjectionChannel

EXPERIMENTS = ("schmidt-stats", "fidelity", "page", "classical", "hm-check", "circuit-compare")
FINAL_STATES = ("hm", "haar", "product")
INTERACTIONS = ("none", "haar-unitary", "haar-state", "circuit")

# each sized so the acceptance tolerance spans >= 3 predicted standard errors
DEFAULT_TRIALS = {
    "schmidt-stats": 500,
    "fidelity": 500,
    "page": 2000,
    "classical": 500,
    "hm-check": 50,
    "circuit-compare": 300,
}
DEFAULT_DIM = {
    "schmidt-stats": 16,
    "fidelity": 64,
    "page": 8,
    "classical": 16,
    "hm-check": 8,
}
DEFAULT_QUBITS = 5
# stream ids with the top bit set feed the reference Haar ensemble
HAAR_REFERENCE_STREAM = 1 << 63


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    dim: int | None = None
    qubits: int | None = None
    trials: int | None = None
    seed: int = 0
    final_state: str = "haar"
    interaction: str = "haar-state"
    depth: int | None = None
    inputs: int = 32
    sigma: float = 3.0
    workers: int = 1

    @property
    def n(self):
        return self.dim if self.dim is not None else 2 ** self.qubits

    def resolved(self) -> "ExperimentConfig":
        """Fill experiment-dependent defaults and validate."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.final_state not in FINAL_STATES:
            raise ConfigError(f"unknown final state {self.final_state!r}")
        if self.interaction not in INTERACTIONS:
            raise ConfigError(f"unknown interaction {self.interaction!r}")
        if self.dim is not None and self.qubits is not None:
            raise ConfigError("set exactly one of dim and qubits")
        cfg = self
        needs_qubits = self.experiment == "circuit-compare" or self.interaction == "circuit"
        if cfg.dim is None and cfg.qubits is None:
            if needs_qubits:
                cfg = replace(cfg, qubits=DEFAULT_QUBITS)
            else:
                cfg = replace(cfg, dim=DEFAULT_DIM[self.experiment])
        if needs_qubits and cfg.qubits is None:
            if cfg.dim < 2 or cfg.dim & (cfg.dim - 1):
                raise ConfigError("circuit modes need --qubits (or a power-of-two --dim)")
            cfg = replace(cfg, qubits=cfg.dim.bit_length() - 1, dim=None)
        if cfg.trials is None:
            cfg = replace(cfg, trials=DEFAULT_TRIALS[self.experiment])
        if needs_qubits and cfg.depth is None:
            cfg = replace(cfg, depth=4 * cfg.qubits)
        if cfg.trials < 1:
            raise ConfigError("trials must be >= 1")
        if cfg.n < 1 or (cfg.qubits is not None and cfg.qubits < 1):
            raise ConfigError("dimension must be >= 1")
        if cfg.depth is not None and cfg.depth < 0:
            raise ConfigError("depth must be >= 0")
        if cfg.inputs < 1:
            raise ConfigError("inputs must be >= 1")
        if cfg.workers < 1:
            raise ConfigError("workers must be >= 1")
        if cfg.interaction == "haar-unitary" and cfg.n > finalstate.EXPLICIT_U_MAX_DIM:
            raise ConfigError(
                f"haar-unitary interaction materializes an N^2 x N^2 unitary; "
                f"N={cfg.n} exceeds the cap N <= {finalstate.EXPLICIT_U_MAX_DIM}")
        if needs_qubits and 2 * cfg.qubits > circuits.MAX_TOTAL_QUBITS:
            raise ConfigError(f"circuits are capped at {circuits.MAX_TOTAL_QUBITS} total qubits")
        if not 0 <= cfg.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return cfg

    def echo(self) -> dict:
        """Config as written to output documents (worker count excluded)."""
        d = asdict(self)
        d.pop("workers")
        return d


@dataclass
class TrialRecord:
    index: int
    trace_norm: float | None = None
    trace_norm_ratio: float | None = None
    entropy_bits: float | None = None
    entropy_nats: float | None = None
    purity: float | None = None
    banaszek_f: float | None = None
    typical_f: float | None = None
    mean_exact_f: float | None = None
    exact_minus_banaszek: float | None = None
    min_lambda: float | None = None
    classical_success: bool | None = None
    symbols_tested: int | None = None
    symbols_decoded: int | None = None
    unitarity_defect: float | None = None
    process_fidelity: float | None = None
    haar_entropy_bits: float | None = None
    annihilation_flag: bool = False
    annihilations: int = 0
    payload: dict | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "payload":
                continue
            v = getattr(self, f.name)
            if v is not None:
                out[f.name] = v
        return out


@dataclass(frozen=True)
class Check:
    """How a metric is judged: |stat - theory| <= max(sigma * stderr, abs_tol).

    ``reduce="max"`` judges the worst single trial against ``abs_tol`` instead
    of the mean; ``upper_bound`` passes when the statistic is <= theory.
    """
    theory: float | None
    abs_tol: float | None = None
    reduce: str = "mean"
    upper_bound: bool = False


@dataclass
class MetricSummary:
    mean: float
    stderr: float | None
    theory: float | None
    abs_dev: float | None
    allowed: float | None
    passed: bool | None
    n: int
    worst: float | None = None

    def to_dict(self):
        d = {"mean": self.mean, "stderr": self.stderr, "theory": self.theory,
             "abs_dev": self.abs_dev, "allowed": self.allowed, "pass": self.passed,
             "n": self.n}
        if self.worst is not None:
            d["worst"] = self.worst
        return d


@dataclass
class Summary:
    experiment: str
    metrics: dict
    counts: dict = field(default_factory=dict)
    reference: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(m.passed is not False for m in self.metrics.values())


def summarize_metric(values, check: Check | None, sigma=3.0) -> MetricSummary:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no values to aggregate")
    mean = float(np.mean(v))
    stderr = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else None
    if check is None or check.theory is None:
        return MetricSummary(mean, stderr, None, None, None, None, int(v.size))
    theory = float(check.theory)
    if check.reduce == "max":
        worst = float(np.max(np.abs(v - theory)))
        allowed = float(check.abs_tol or 0.0)
        return MetricSummary(mean, stderr, theory, abs(mean - theory), allowed,
                             worst <= allowed, int(v.size), worst)
    if check.upper_bound:
        return MetricSummary(mean, stderr, theory, abs(mean - theory), theory,
                             mean <= theory, int(v.size))
    abs_dev = abs(mean - theory)
    allowed = max(sigma * (stderr or 0.0), check.abs_tol or 0.0)
    return MetricSummary(mean, stderr, theory, abs_dev, allowed, abs_dev <= allowed, int(v.size))


def aggregate(records, oracles: dict, sigma=3.0, experiment="") -> Summary:
    """Reduce trial records metric by metric, in record order."""
    records = list(records)
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    metrics = {}
    for name, check in oracles.items():
        values = [getattr(r, name) for r in records]
        values = [float(x) for x in values if x is not None]
        if values:
            metrics[name] = summarize_metric(values, check, sigma)
    annihilated = sum(r.annihilations for r in records)
    counts = {"trials": len(records), "annihilations": annihilated}
    return Summary(experiment, metrics, counts, records=records)


# -- per-channel measurements -------------------------------------------------

class EscapeOutcome(NamedTuple):
    success: bool
    annihilated: bool
    symbol: int
    decoded: int | None

    def __bool__(self):
        return self.success


def classical_escape_trial(ch: ProjectionChannel, rng: randsrc.RngStream, symbol=None) -> EscapeOutcome:
    """Encode a symbol in a matter Schmidt vector, project, decode by max overlap."""
    if symbol is None:
        symbol = rng.integers(ch.n)
    mu = np.zeros(ch.n, dtype=np.complex128)
    mu[symbol] = 1.0
    try:
        out, _ = finalstate.apply_channel(ch, finalstate.InputState(mu))
    except finalstate.AnnihilatedInputError:
        return EscapeOutcome(False, True, symbol, None)
    probs = np.abs(ch.out_basis.conj().T @ out) ** 2
    decoded = int(np.argmax(probs))
    return EscapeOutcome(decoded == symbol, False, symbol, decoded)


def sample_exact_fidelities(lambdas, n_inputs, rng: randsrc.RngStream):
    """Exact escape fidelities of uniformly random inputs; returns (values, annihilated)."""
    lam = np.asarray(lambdas, dtype=float)
    n = lam.size
    z = randsrc.complex_normal((n_inputs, n), rng)
    w = np.abs(z) ** 2
    w /= w.sum(axis=1, keepdims=True)
    # squared pre-norm of the projected output is (1/N) sum lambda^2 w
    pre_norm2 = (w @ lam ** 2) / n
    dead = pre_norm2 < finalstate.ANNIHILATION_TOL ** 2
    f = finalstate.fidelity_from_weights(lam, w[~dead])
    return f, int(dead.sum())


def mean_exact_fidelity(ch, n_inputs: int, rng: randsrc.RngStream) -> float:
    if n_inputs < 1:
        raise ValueError("n_inputs must be >= 1")
    lam = getattr(ch, "lambdas", ch)
    f, _ = sample_exact_fidelities(lam, n_inputs, rng)
    return float(np.mean(f)) if f.size else float("nan")


# -- state / channel sources ----------------------------------------------------

def draw_final_state(kind, n, rng):
    if kind == "hm":
        return finalstate.hm_final_state(randsrc.haar_unitary(n, rng))
    if kind == "haar":
        return randsrc.random_pure_state(n, n, rng)
    if kind == "product":
        return finalstate.product_final_state(
            randsrc.random_unit_vector(n, rng), randsrc.random_unit_vector(n, rng))
    raise ConfigError(f"unknown final state {kind!r}")


def draw_post_interaction_state(cfg: ExperimentConfig, rng):
    n = cfg.n
    if cfg.interaction == "haar-state":
        return randsrc.random_pure_state(n, n, rng)
    final = draw_final_state(cfg.final_state, n, rng)
    if cfg.interaction == "none":
        return final
    if cfg.interaction == "haar-unitary":
        return finalstate.post_interaction_state(final, randsrc.haar_unitary(n * n, rng))
    spec = circuits.CircuitSpec(cfg.qubits, cfg.depth)
    return circuits.pseudorandom_state(spec, rng, initial=final)


def draw_channel(cfg: ExperimentConfig, rng) -> ProjectionChannel:
    return finalstate.channel_from_random_state(draw_post_interaction_state(cfg, rng))


# -- trials -----------------------------------------------------------------------

def _spectral_record(i, lam, n):
    tn = stats.trace_norm_sum(lam)
    return TrialRecord(
        index=i,
        trace_norm=tn,
        trace_norm_ratio=tn / math.sqrt(n),
        entropy_bits=stats.entanglement_entropy_bits(lam),
        purity=stats.purity(lam),
        min_lambda=float(lam[-1]),
    )


def _trial_schmidt(cfg, i):
    rng = randsrc.RngStream(cfg.seed, i)
    lam = stats.schmidt_coefficients(draw_post_interaction_state(cfg, rng))
    return _spectral_record(i, lam, cfg.n)


def _trial_fidelity(cfg, i):
    rng = randsrc.RngStream(cfg.seed, i)
    n = cfg.n
    lam = stats.schmidt_coefficients(draw_post_interaction_state(cfg, rng))
    rec = _spectral_record(i, lam, n)
    rec.banaszek_f = stats.banaszek_fidelity(lam, n)
    rec.typical_f = (rec.trace_norm / math.sqrt(n)) ** 2
    f, dead = sample_exact_fidelities(lam, cfg.inputs, rng)
    if f.size:
        rec.mean_exact_f = float(np.mean(f))
        rec.exact_minus_banaszek = rec.mean_exact_f - rec.banaszek_f
    rec.annihilations = dead
    rec.annihilation_flag = dead > 0
    return rec


def _trial_page(cfg, i):
    rng = randsrc.RngStream(cfg.seed, i)
    lam = stats.schmidt_coefficients(draw_post_interaction_state(cfg, rng))
    rec = _spectral_record(i, lam, cfg.n)
    rec.entropy_nats = rec.entropy_bits * stats.LN2
    return rec


def _trial_classical(cfg, i):
    rng = randsrc.RngStream(cfg.seed, i)
    ch = draw_channel(cfg, rng)
    outcomes = [classical_escape_trial(ch, rng, symbol) for symbol in range(ch.n)]
    decoded = sum(o.success for o in outcomes)
    dead = sum(o.annihilated for o in outcomes)
    return TrialRecord(
        index=i,
        min_lambda=float(ch.lambdas[-1]),
        classical_success=decoded == ch.n,
        symbols_tested=ch.n,
        symbols_decoded=decoded,
        annihilation_flag=dead > 0,
        annihilations=dead,
        payload={"success_rate": decoded / ch.n},
    )


def _trial_hm(cfg, i):
    rng = randsrc.RngStream(cfg.seed, i)
    s = randsrc.haar_unitary(cfg.n, rng)
    ch = finalstate.channel_from_final_state(finalstate.hm_final_state(s))
    v = ch.normalized()
    return TrialRecord(
        index=i,
        trace_norm=stats.trace_norm_sum(ch.lambdas),
        entropy_bits=stats.entanglement_entropy_bits(ch.lambdas),
        unitarity_defect=linalg.unitarity_defect(v),
        # documented image of S under the coefficient convention is S^dagger
        process_fidelity=finalstate.process_fidelity(v, s.conj().T),
    )


def _trial_circuit(cfg, i):
    spec = circuits.CircuitSpec(cfg.qubits, cfg.depth)
    lam_c = stats.schmidt_coefficients(
        circuits.pseudorandom_state(spec, randsrc.RngStream(cfg.seed, i)))
    lam_h = stats.schmidt_coefficients(
        randsrc.random_pure_state(spec.dim, spec.dim,
                                  randsrc.RngStream(cfg.seed, HAAR_REFERENCE_STREAM | i)))
    rec = _spectral_record(i, lam_c, spec.dim)
    rec.haar_entropy_bits = stats.entanglement_entropy_bits(lam_h)
    rec.payload = {"circuit": lam_c, "haar": lam_h}
    return rec


_TRIALS = {
    "schmidt-stats": _trial_schmidt,
    "fidelity": _trial_fidelity,
    "page": _trial_page,
    "classical": _trial_classical,
    "hm-check": _trial_hm,
    "circuit-compare": _trial_circuit,
}


def run_trials(cfg: ExperimentConfig):
    fn = _TRIALS[cfg.experiment]
    if cfg.workers == 1:
        return [fn(cfg, i) for i in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda i: fn(cfg, i), range(cfg.trials)))


# -- oracles per experiment --------------------------------------------------------

def fidelity_tolerance(n):
    return 0.01 if n >= 256 else 0.02


def oracle_checks(cfg: ExperimentConfig) -> dict:
    n = cfg.n
    ideal = stats.ideal_transfer_oracles()
    ratio = Check(stats.asymptotic_mean_trace_norm(n) / math.sqrt(n), abs_tol=0.01)
    page = Check(stats.page_entropy_exact(n, n))
    lubkin = Check(stats.lubkin_purity_exact(n, n))
    f_inf = stats.asymptotic_fidelity()
    if cfg.experiment == "schmidt-stats":
        return {"trace_norm_ratio": ratio, "entropy_bits": page, "purity": lubkin,
                "trace_norm": None, "min_lambda": None}
    if cfg.experiment == "fidelity":
        tol = fidelity_tolerance(n)
        return {"trace_norm_ratio": ratio,
                "banaszek_f": Check(f_inf, abs_tol=tol),
                "typical_f": Check(f_inf, abs_tol=tol),
                "mean_exact_f": Check(f_inf, abs_tol=tol),
                "exact_minus_banaszek": None,
                "entropy_bits": None, "purity": None, "trace_norm": None}
    if cfg.experiment == "page":
        return {"entropy_bits": page,
                "entropy_nats": Check(stats.page_entropy_exact_nats(n, n)),
                "purity": lubkin, "trace_norm_ratio": None}
    if cfg.experiment == "classical":
        return {"min_lambda": None}
    if cfg.experiment == "hm-check":
        return {"unitarity_defect": Check(ideal["unitarity_defect"], abs_tol=1e-10, reduce="max"),
                "process_fidelity": Check(ideal["process_fidelity"], abs_tol=1e-10, reduce="max"),
                "entropy_bits": Check(math.log2(n), abs_tol=1e-10, reduce="max")}
    if cfg.experiment == "circuit-compare":
        return {"entropy_bits": Check(stats.page_entropy_exact(n, n), abs_tol=0.05),
                "haar_entropy_bits": page, "purity": lubkin}
    raise ConfigError(f"unknown experiment {cfg.experiment!r}")


def run_experiment(cfg: ExperimentConfig) -> Summary:
    cfg = cfg.resolved()
    records = run_trials(cfg)
    summary = aggregate(records, oracle_checks(cfg), sigma=cfg.sigma, experiment=cfg.experiment)
    n = cfg.n
    if cfg.experiment == "fidelity":
        summary.reference = {
            "asymptotic_fidelity": stats.asymptotic_fidelity(),
            "printed_fidelity_candidate": stats.printed_fidelity_value(),
            "trace_norm_constant": stats.trace_norm_constant(),
            "asymptotic_mean_trace_norm": stats.asymptotic_mean_trace_norm(n),
        }
    elif cfg.experiment in ("page", "schmidt-stats"):
        page_bits = stats.page_entropy_exact(n, n)
        summary.reference = {
            "max_entropy_bits": math.log2(n),
            "page_entropy_bits": page_bits,
            "page_entropy_nats": stats.page_entropy_exact_nats(n, n),
            "deficit_bits": math.log2(n) - page_bits,
            "deficit_nats": math.log(n) - stats.page_entropy_exact_nats(n, n),
            "deficit_limit_bits": stats.page_deficit_limit_bits(),
            "deficit_limit_nats": stats.page_deficit_limit_bits() * stats.LN2,
            "lubkin_purity": stats.lubkin_purity_exact(n, n),
        }
        summary.counts["mean_deficit_bits"] = math.log2(n) - summary.metrics["entropy_bits"].mean
    elif cfg.experiment == "classical":
        rates = [r.payload["success_rate"] for r in records]
        summary.metrics["success_rate"] = summarize_metric(
            rates, Check(stats.ideal_transfer_oracles()["classical_success"], abs_tol=0.0), cfg.sigma)
        summary.counts["symbols_tested"] = sum(r.symbols_tested for r in records)
        summary.counts["symbols_decoded"] = sum(r.symbols_decoded for r in records)
        summary.counts["failures_with_nonzero_lambda"] = sum(
            r.symbols_tested - r.symbols_decoded - r.annihilations for r in records)
    elif cfg.experiment == "circuit-compare":
        pool_c = circuits.squared_schmidt_pool([r.payload["circuit"] for r in records])
        pool_h = circuits.squared_schmidt_pool([r.payload["haar"] for r in records])
        ks = stats.ks_statistic(pool_c, pool_h)
        crit = stats.ks_critical_value(pool_c.size, pool_h.size, 0.01)
        summary.metrics["ks_distance"] = MetricSummary(
            ks, None, crit, abs(ks - crit), crit, ks <= crit, len(records))
        spec = circuits.CircuitSpec(cfg.qubits, cfg.depth)
        summary.counts["gate_count"] = spec.gate_count
        summary.counts["gates_per_layer"] = spec.total_qubits // 2
        summary.reference = {"ks_critical_1pct": crit,
                             "page_entropy_bits": stats.page_entropy_exact(n, n)}
    return summary
