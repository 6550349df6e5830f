"""Ergodic hidden Markov model with multivariate Gaussian emissions.

Provides random initialization, expectation-maximization training with
restarts, the scaled forward recursion (with the per-slot predictive
log-likelihood series it induces), and Viterbi decoding. All recursions
are normalized per step so 40-slot sequences with near-degenerate
covariances never underflow.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import InternalError, NumericError, ValidationError
from .pca import PcaModel, transform

VARIANCE_FLOOR_SCALE = 1e-6


@dataclass(frozen=True)
class GaussianHmm:
    pi: np.ndarray           # (n,)
    A: np.ndarray            # (n, n) row-stochastic
    means: np.ndarray        # (n, D)
    covariances: np.ndarray  # (n, D, D) symmetric positive-definite
    variance_floor: np.ndarray  # (D,)

    @property
    def n(self) -> int:
        return self.pi.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def validate(self) -> None:
        if abs(self.pi.sum() - 1.0) > 1e-9 or (self.pi < 0).any():
            raise ValidationError("hmm: pi must be a probability vector")
        if np.abs(self.A.sum(axis=1) - 1.0).max() > 1e-9 or (self.A < 0).any():
            raise ValidationError("hmm: every row of A must be a probability vector")
        if self.means.shape[0] != self.n or self.covariances.shape != (self.n, self.dim, self.dim):
            raise ValidationError("hmm: inconsistent parameter shapes")


@dataclass(frozen=True)
class LikelihoodSeries:
    """Per-slot predictive log-likelihoods; they sum to log P(O | model)."""

    values: np.ndarray  # (T,)

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class TrainConfig:
    max_iterations: int = 20
    loglik_tolerance: float = 1e-6
    restarts: int = 5
    seed: int = 0
    diagonal: bool = True

    def validate(self) -> None:
        if self.max_iterations < 1:
            raise ValidationError("train.max_iterations: must be >= 1")
        if self.loglik_tolerance <= 0:
            raise ValidationError("train.loglik_tolerance: must be > 0")
        if self.restarts < 1:
            raise ValidationError("train.restarts: must be >= 1")


def _as_sequences(sequences) -> list[np.ndarray]:
    if isinstance(sequences, np.ndarray) and sequences.ndim == 2:
        sequences = [sequences]
    out = []
    for seq in sequences:
        arr = np.asarray(seq, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValidationError("observation sequence must be a non-empty (T, D) array")
        out.append(arr)
    if not out:
        raise ValidationError("need at least one observation sequence")
    dims = {a.shape[1] for a in out}
    if len(dims) != 1:
        raise ValidationError("observation sequences must share one dimensionality")
    return out


def init_random(n: int, training_data: np.ndarray, seed: int) -> GaussianHmm:
    """Random model around the data statistics.

    Mean components are uniform in (mu - 3 sigma, mu + 3 sigma) per
    dimension, diagonal variances uniform in (sigma^2 / 2, 3 sigma^2),
    and pi and the rows of A are uniform draws renormalized onto the
    simplex. Deterministic in the seed.
    """
    data = np.asarray(training_data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[0] < 2:
        raise ValidationError("init_random: need at least 2 training rows")
    if n < 1:
        raise ValidationError("init_random: need at least 1 state")
    mu = data.mean(axis=0)
    sigma = data.std(axis=0)
    var = sigma ** 2
    floor = np.maximum(VARIANCE_FLOOR_SCALE * var, 1e-12)
    if (sigma == 0).any():
        warnings.warn("init_random: zero-variance dimension, variance floor applied",
                      RuntimeWarning, stacklevel=2)
    gen = rng.substream(seed, rng.INIT)
    means = gen.uniform(mu - 3 * sigma, mu + 3 * sigma, size=(n, data.shape[1]))
    variances = gen.uniform(var / 2.0, 3.0 * var, size=(n, data.shape[1]))
    variances = np.maximum(variances, floor)
    covs = np.array([np.diag(v) for v in variances])
    pi = gen.uniform(size=n)
    pi = pi / pi.sum()
    A = gen.uniform(size=(n, n))
    A = A / A.sum(axis=1, keepdims=True)
    return GaussianHmm(pi=pi, A=A, means=means, covariances=covs, variance_floor=floor)


def emission_logdensity(model: GaussianHmm, state: int, observation: np.ndarray) -> float:
    """Log density of one observation under one state's Gaussian."""
    obs = np.asarray(observation, dtype=float).reshape(1, -1)
    if obs.shape[1] != model.dim:
        raise ValidationError(f"emission_logdensity: expected a {model.dim}-vector")
    return float(_log_obs_matrix(model, obs)[0, state])


def _log_obs_matrix(model: GaussianHmm, obs: np.ndarray) -> np.ndarray:
    """(T, n) matrix of per-state log emission densities."""
    T, D = obs.shape
    out = np.empty((T, model.n))
    for i in range(model.n):
        cov = model.covariances[i]
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"state {i}: covariance is not positive definite") from exc
        diff = obs - model.means[i]
        y = np.linalg.solve(chol, diff.T)
        quad = (y ** 2).sum(axis=0)
        logdet = 2.0 * np.log(np.diag(chol)).sum()
        out[:, i] = -0.5 * (quad + logdet + D * np.log(2.0 * np.pi))
    return out


def _forward_pass(model: GaussianHmm, log_b: np.ndarray):
    """Normalized forward recursion.

    Returns (alpha, per_step_loglik) where alpha rows sum to one and
    per_step_loglik[t] = log P(o_t | o_1..o_{t-1}).
    """
    T, n = log_b.shape
    alpha = np.empty((T, n))
    steps = np.empty(T)
    shift = log_b.max(axis=1)
    eb = np.exp(log_b - shift[:, None])
    w = model.pi * eb[0]
    s = w.sum()
    if s <= 0 or not np.isfinite(s):
        raise NumericError("forward recursion underflow at t=0")
    alpha[0] = w / s
    steps[0] = np.log(s) + shift[0]
    for t in range(1, T):
        w = (alpha[t - 1] @ model.A) * eb[t]
        s = w.sum()
        if s <= 0 or not np.isfinite(s):
            raise NumericError(f"forward recursion underflow at t={t}")
        alpha[t] = w / s
        steps[t] = np.log(s) + shift[t]
    return alpha, steps


def forward_loglik(model: GaussianHmm, sequence: np.ndarray) -> tuple[float, LikelihoodSeries]:
    """Total log-likelihood of the sequence plus the per-slot series.

    The slot values are incremental: the t-th entry is the predictive
    log-likelihood of slot t given all earlier slots, so the series sums
    exactly to the sequence log-likelihood.
    """
    seq = _as_sequences([sequence])[0]
    if seq.shape[1] != model.dim:
        raise ValidationError(
            f"forward_loglik: sequence dimension {seq.shape[1]} != model dimension {model.dim}")
    log_b = _log_obs_matrix(model, seq)
    _, steps = _forward_pass(model, log_b)
    return float(steps.sum()), LikelihoodSeries(values=steps)


def viterbi(model: GaussianHmm, sequence: np.ndarray) -> tuple[np.ndarray, float]:
    """Most probable state path and its joint log-probability.

    Ties break toward the lower state index.
    """
    seq = _as_sequences([sequence])[0]
    if seq.shape[1] != model.dim:
        raise ValidationError(
            f"viterbi: sequence dimension {seq.shape[1]} != model dimension {model.dim}")
    log_b = _log_obs_matrix(model, seq)
    T, n = log_b.shape
    with np.errstate(divide="ignore"):
        log_pi = np.log(model.pi)
        log_A = np.log(model.A)
    delta = np.empty((T, n))
    back = np.zeros((T, n), dtype=int)
    delta[0] = log_pi + log_b[0]
    for t in range(1, T):
        cand = delta[t - 1][:, None] + log_A
        back[t] = np.argmax(cand, axis=0)
        delta[t] = cand[back[t], np.arange(n)] + log_b[t]
    path = np.empty(T, dtype=int)
    path[T - 1] = int(np.argmax(delta[T - 1]))
    for t in range(T - 2, -1, -1):
        path[t] = back[t + 1][path[t + 1]]
    return path, float(delta[T - 1][path[T - 1]])


def _e_step(model: GaussianHmm, seq: np.ndarray):
    log_b = _log_obs_matrix(model, seq)
    T, n = log_b.shape
    shift = log_b.max(axis=1)
    eb = np.exp(log_b - shift[:, None])
    alpha, steps = _forward_pass(model, log_b)
    scale = np.exp(steps - shift)  # the linear-space normalizers of each step
    beta = np.empty((T, n))
    beta[T - 1] = 1.0
    for t in range(T - 2, -1, -1):
        beta[t] = (model.A @ (eb[t + 1] * beta[t + 1])) / scale[t + 1]
    gamma = alpha * beta
    gamma = gamma / gamma.sum(axis=1, keepdims=True)
    xi_sum = np.zeros((n, n))
    for t in range(T - 1):
        xi = alpha[t][:, None] * model.A * (eb[t + 1] * beta[t + 1])[None, :] / scale[t + 1]
        total = xi.sum()
        if total <= 0 or not np.isfinite(total):
            raise NumericError(f"posterior underflow at transition {t}")
        xi_sum += xi / total
    return float(steps.sum()), gamma, xi_sum


def _em_run(model: GaussianHmm, seqs: list[np.ndarray], config: TrainConfig):
    trace: list[float] = []
    prev = -np.inf
    for _ in range(config.max_iterations):
        total_ll = 0.0
        n, D = model.n, model.dim
        pi_acc = np.zeros(n)
        xi_acc = np.zeros((n, n))
        gamma_trans_acc = np.zeros(n)
        gamma_acc = np.zeros(n)
        mean_acc = np.zeros((n, D))
        gammas = []
        for seq in seqs:
            ll, gamma, xi_sum = _e_step(model, seq)
            total_ll += ll
            gammas.append(gamma)
            pi_acc += gamma[0]
            xi_acc += xi_sum
            gamma_trans_acc += gamma[:-1].sum(axis=0)
            gamma_acc += gamma.sum(axis=0)
            mean_acc += gamma.T @ seq
        trace.append(total_ll)
        if total_ll < prev - 1e-8 * max(1.0, abs(prev)):
            raise InternalError(
                f"EM log-likelihood decreased from {prev} to {total_ll}")
        if prev > -np.inf and abs(total_ll - prev) / max(abs(prev), 1e-300) < config.loglik_tolerance:
            break
        prev = total_ll

        # M step
        pi = pi_acc / len(seqs)
        pi = pi / pi.sum()
        denom = np.where(gamma_trans_acc > 0, gamma_trans_acc, 1.0)
        A = xi_acc / denom[:, None]
        rows = A.sum(axis=1)
        A = np.where(rows[:, None] > 0, A / np.where(rows[:, None] > 0, rows[:, None], 1.0),
                     np.full((model.n, model.n), 1.0 / model.n))
        occ = np.where(gamma_acc > 0, gamma_acc, 1.0)
        means = mean_acc / occ[:, None]
        covs = np.zeros((n, D, D))
        for seq, gamma in zip(seqs, gammas):
            for i in range(n):
                diff = seq - means[i]
                covs[i] += (gamma[:, i][:, None] * diff).T @ diff
        covs = covs / occ[:, None, None]
        floor = model.variance_floor
        for i in range(n):
            if config.diagonal:
                covs[i] = np.diag(np.maximum(np.diag(covs[i]), floor))
            else:
                covs[i] = 0.5 * (covs[i] + covs[i].T)
                vals, vecs = np.linalg.eigh(covs[i])
                vals = np.maximum(vals, floor.max())
                covs[i] = vecs @ np.diag(vals) @ vecs.T
        model = GaussianHmm(pi=pi, A=A, means=means, covariances=covs,
                            variance_floor=model.variance_floor)
    final_ll = sum(forward_loglik(model, seq)[0] for seq in seqs)
    return model, trace, final_ll


def baum_welch(model: GaussianHmm, sequences, config: TrainConfig | None = None):
    """EM training; returns (trained model, per-iteration log-likelihood trace).

    With restarts > 1, additional models drawn by init_random with seeds
    derived from config.seed compete, and the fit with the highest final
    log-likelihood wins.
    """
    config = config or TrainConfig()
    config.validate()
    seqs = _as_sequences(sequences)
    total_obs = sum(s.shape[0] for s in seqs)
    if total_obs < model.n:
        raise ValidationError("baum_welch: fewer observations than states")
    best = _em_run(model, seqs, config)
    if config.restarts > 1:
        pooled = np.concatenate(seqs, axis=0)
        for r in range(1, config.restarts):
            restart_seed = np.random.SeedSequence(
                entropy=int(config.seed), spawn_key=(rng.INIT, r)).generate_state(1)[0]
            candidate = init_random(model.n, pooled, int(restart_seed))
            result = _em_run(candidate, seqs, config)
            if result[2] > best[2]:
                best = result
    trained, trace, _ = best
    return trained, np.array(trace)


def score_run(model: GaussianHmm, pca_model: PcaModel, series) -> LikelihoodSeries:
    """Project a feature series through the PCA model and score each slot."""
    matrix = series.matrix if hasattr(series, "matrix") else np.asarray(series, dtype=float)
    projected = transform(pca_model, matrix)
    if projected.shape[1] != model.dim:
        raise ValidationError(
            f"score_run: projection dimension {projected.shape[1]} != model dimension {model.dim}")
    _, ll = forward_loglik(model, projected)
    return ll


# -- persistence ----------------------------------------------------------------


def save_model(model: GaussianHmm, path: str, train_config: TrainConfig | None = None) -> None:
    payload = {
        "n": model.n,
        "dim": model.dim,
        "pi": model.pi.tolist(),
        "A": model.A.tolist(),
        "means": model.means.tolist(),
        "covariances": model.covariances.tolist(),
        "variance_floor": model.variance_floor.tolist(),
    }
    if train_config is not None:
        payload["train_config"] = {
            "max_iterations": train_config.max_iterations,
            "loglik_tolerance": train_config.loglik_tolerance,
            "restarts": train_config.restarts,
            "seed": train_config.seed,
            "diagonal": train_config.diagonal,
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_model(path: str) -> GaussianHmm:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        model = GaussianHmm(
            pi=np.array(data["pi"], dtype=float),
            A=np.array(data["A"], dtype=float),
            means=np.array(data["means"], dtype=float),
            covariances=np.array(data["covariances"], dtype=float),
            variance_floor=np.array(data["variance_floor"], dtype=float))
    except KeyError as exc:
        raise ValidationError(f"hmm model file: missing field {exc}") from exc
    model.validate()
    return model


# -- likelihood series I/O --------------------------------------------------------


def format_likelihood_series(series: LikelihoodSeries) -> str:
    lines = ["slot_index,loglik"]
    for i, v in enumerate(series.values):
        lines.append(f"{i},{float(v)!r}")
    return "\n".join(lines) + "\n"


def parse_likelihood_series(text: str) -> LikelihoodSeries:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "slot_index,loglik":
        raise ValidationError("likelihood series: missing or malformed header row")
    values = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 2:
            raise ValidationError(f"likelihood series: bad row {ln!r}")
        values.append(float(parts[1]))
    return LikelihoodSeries(values=np.array(values))
