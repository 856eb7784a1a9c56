"""Gaussian-process Bayesian optimization with expected improvement.

Maximizes a black-box objective (validation accuracy over hyperparameters)
on the unit cube.  Surrogate: GP with Matern 5/2 ARD kernel, hyperparameters
set by multi-start maximization of the log marginal likelihood.  Acquisition:
expected improvement with exploration margin xi.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm

from .errors import DegenerateKernelMatrix, EmptyInput, InvalidConfig

DEFAULT_XI = 0.1
N_INIT = 5
EARLY_STOP_TOL = 1e-3
EARLY_STOP_RUNS = 3


@dataclass
class Dimension:
    name: str
    kind: str  # "integer" | "continuous"
    lo: float
    hi: float

    def validate(self):
        if self.lo >= self.hi:
            raise InvalidConfig(f"{self.name}: lo >= hi")
        if self.kind not in ("integer", "continuous"):
            raise InvalidConfig(f"{self.name}: kind {self.kind!r}")
        if self.kind == "integer" and (self.lo != int(self.lo) or self.hi != int(self.hi)):
            raise InvalidConfig(f"{self.name}: integer bounds must be integral")

    def decode(self, u: float):
        v = self.lo + float(u) * (self.hi - self.lo)
        return int(round(v)) if self.kind == "integer" else v


@dataclass
class SearchSpace:
    dims: list[Dimension]

    def validate(self):
        if not self.dims:
            raise EmptyInput("empty search space")
        for d in self.dims:
            d.validate()

    @property
    def names(self):
        return [d.name for d in self.dims]

    def decode(self, u) -> dict:
        return {d.name: d.decode(ui) for d, ui in zip(self.dims, u)}


# search spaces matching the four model families
MODEL_SPACES = {
    "rf": SearchSpace([
        Dimension("n_trees", "integer", 10, 10_000),
        Dimension("min_samples_leaf", "integer", 20, 50),
    ]),
    "svm": SearchSpace([Dimension("alpha", "continuous", 0.0001, 0.1)]),
    "ffnn": SearchSpace([
        Dimension("h1", "integer", 5, 600),
        Dimension("h2", "integer", 5, 320),
        Dimension("h3", "integer", 5, 120),
        Dimension("dropout3", "continuous", 0.0, 1.0),
    ]),
    "cnn": SearchSpace([
        Dimension("k1", "integer", 5, 60),
        Dimension("k2", "integer", 5, 60),
        Dimension("k3", "integer", 5, 60),
        Dimension("h1", "integer", 5, 600),
        Dimension("h2", "integer", 5, 320),
        Dimension("h3", "integer", 5, 120),
        Dimension("dropout3", "continuous", 0.0, 1.0),
    ]),
}


# ---------------------------------------------------------------------------
# Gaussian process
# ---------------------------------------------------------------------------

def _matern52(xa, xb, length_scales, signal_var):
    d = (xa[:, None, :] - xb[None, :, :]) / length_scales
    r = np.sqrt(np.maximum((d * d).sum(axis=2), 0.0))
    s5r = np.sqrt(5.0) * r
    return signal_var * (1.0 + s5r + 5.0 * r * r / 3.0) * np.exp(-s5r)


class GP:
    """Posterior over the objective given observations on the unit cube."""

    def __init__(self, length_scales, signal_var, noise_var):
        self.length_scales = np.atleast_1d(np.asarray(length_scales, float))
        self.signal_var = float(signal_var)
        self.noise_var = float(noise_var)
        self.x = np.zeros((0, self.length_scales.size))
        self.y_mean = 0.0
        self._alpha = None
        self._chol = None

    def condition(self, x, y):
        x = np.atleast_2d(np.asarray(x, float))
        y = np.asarray(y, float)
        self.x = x
        if len(y) == 0:
            self._alpha = None
            return self
        self.y_mean = float(y.mean())
        k = _matern52(x, x, self.length_scales, self.signal_var)
        self._chol = _chol_with_jitter(k + self.noise_var * np.eye(len(x)))
        r = y - self.y_mean
        self._alpha = np.linalg.solve(
            self._chol.T, np.linalg.solve(self._chol, r)
        )
        return self

    def predict(self, xq):
        """Posterior mean and variance at query points (n, d)."""
        xq = np.atleast_2d(np.asarray(xq, float))
        if self._alpha is None:  # prior
            return (np.full(len(xq), self.y_mean),
                    np.full(len(xq), self.signal_var))
        ks = _matern52(xq, self.x, self.length_scales, self.signal_var)
        mu = self.y_mean + ks @ self._alpha
        v = np.linalg.solve(self._chol, ks.T)
        var = self.signal_var + self.noise_var - (v * v).sum(axis=0)
        return mu, np.maximum(var, 0.0)


def _chol_with_jitter(k):
    jitter = 0.0
    for _ in range(8):
        try:
            return np.linalg.cholesky(k + jitter * np.eye(len(k)))
        except np.linalg.LinAlgError:
            jitter = 1e-12 if jitter == 0.0 else jitter * 10.0
            if jitter > 1e-6:
                break
    raise DegenerateKernelMatrix(f"jitter escalation failed at {jitter:g}")


def _neg_log_marginal(theta, x, y):
    d = x.shape[1]
    ls = np.exp(theta[:d])
    sv = np.exp(theta[d])
    nv = np.exp(theta[d + 1])
    k = _matern52(x, x, ls, sv) + nv * np.eye(len(x))
    try:
        chol = _chol_with_jitter(k)
    except DegenerateKernelMatrix:
        return 1e10
    r = y - y.mean()
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, r))
    return float(
        0.5 * r @ alpha + np.log(np.diag(chol)).sum() + 0.5 * len(y) * np.log(2 * np.pi)
    )


def fit_gp(points, values, seed: int = 0, n_starts: int = 4) -> GP:
    """GP with kernel hyperparameters from multi-start likelihood ascent."""
    x = np.atleast_2d(np.asarray(points, float))
    y = np.asarray(values, float)
    if len(x) < 2:
        raise EmptyInput("need at least 2 points to fit a GP")
    if not np.isfinite(y).all():
        raise InvalidConfig("objective values must be finite")
    d = x.shape[1]
    rng = np.random.Generator(np.random.PCG64(seed))
    y_scale = max(float(y.std()), 1e-8)
    best = None
    starts = [np.concatenate([np.zeros(d) + np.log(0.3),
                              [np.log(y_scale ** 2)], [np.log(1e-6)]])]
    for _ in range(n_starts - 1):
        starts.append(np.concatenate([
            rng.uniform(np.log(0.05), np.log(2.0), size=d),
            [np.log(y_scale ** 2) + rng.normal(0, 1)],
            [rng.uniform(np.log(1e-8), np.log(1e-2))],
        ]))
    bounds = [(np.log(1e-3), np.log(1e2))] * d + \
             [(np.log(1e-12), np.log(1e4))] + [(np.log(1e-10), np.log(1.0))]
    for theta0 in starts:
        res = minimize(_neg_log_marginal, theta0, args=(x, y),
                       method="L-BFGS-B", bounds=bounds)
        if best is None or res.fun < best.fun:
            best = res
    theta = best.x
    gp = GP(np.exp(theta[:d]), np.exp(theta[d]), np.exp(theta[d + 1]))
    return gp.condition(x, y)


# ---------------------------------------------------------------------------
# Acquisition
# ---------------------------------------------------------------------------

def expected_improvement(gp: GP, x, f_best: float, xi: float = DEFAULT_XI):
    """EI for maximization with exploration margin xi; always >= 0."""
    mu, var = gp.predict(x)
    sigma = np.sqrt(var)
    u = mu - f_best - xi
    ei = np.where(u > 0, u, 0.0)  # sigma == 0 limit
    pos = sigma > 0
    z = np.zeros_like(mu)
    z[pos] = u[pos] / sigma[pos]
    ei = np.where(pos, u * norm.cdf(z) + sigma * norm.pdf(z), ei)
    return np.maximum(ei, 0.0)


def _propose(gp, f_best, xi, dim, rng, n_candidates=512, n_refine=5):
    cand = rng.random((n_candidates, dim))
    ei = expected_improvement(gp, cand, f_best, xi)
    order = np.argsort(ei)[::-1][:n_refine]
    best_x, best_ei = cand[order[0]], ei[order[0]]
    for i in order:
        res = minimize(
            lambda u: -float(expected_improvement(gp, u[None, :], f_best, xi)[0]),
            cand[i], method="L-BFGS-B", bounds=[(0.0, 1.0)] * dim,
        )
        if -res.fun > best_ei:
            best_ei, best_x = -res.fun, np.clip(res.x, 0.0, 1.0)
    return best_x


# ---------------------------------------------------------------------------
# Optimization loop
# ---------------------------------------------------------------------------

def _latin_hypercube(n, dim, rng):
    u = (rng.random((n, dim)) + np.arange(n)[:, None]) / n
    for j in range(dim):
        u[:, j] = u[rng.permutation(n), j]
    return u


def optimize(objective, space: SearchSpace, max_iter: int = 50, seed: int = 0,
             xi: float = DEFAULT_XI):
    """Sequential BO loop; returns (best decoded params, history).

    ``objective`` receives the decoded {name: value} dict and returns the
    value to maximize.  A failed evaluation is recorded at the worst value
    seen so far and the loop continues.  The loop stops early once the
    proposal lands within 1e-3 (L-inf, unit cube) of an already evaluated
    point on 3 consecutive iterations.
    """
    space.validate()
    rng = np.random.Generator(np.random.PCG64(seed))
    dim = len(space.dims)

    xs: list[np.ndarray] = []
    ys: list[float] = []
    history = []

    def evaluate(u, it):
        try:
            val = float(objective(space.decode(u)))
        except Exception:
            val = min(ys) if ys else 0.0
        xs.append(np.asarray(u, float))
        ys.append(val)
        history.append({
            "iter": it, "point": np.asarray(u, float).tolist(),
            "params": space.decode(u), "value": val,
            "best_so_far": max(ys),
        })

    n_init = min(N_INIT, max_iter)
    for it, u in enumerate(_latin_hypercube(n_init, dim, rng)):
        evaluate(u, it)

    near_misses = 0
    it = n_init
    while it < max_iter:
        # fit on scale-normalized values so xi is an exploration margin in
        # units of the observed objective spread
        scale = max(float(np.std(ys)), 1e-12)
        gp = fit_gp(np.array(xs), np.array(ys) / scale, seed=seed + it)
        u = _propose(gp, max(ys) / scale, xi, dim, rng)
        dist = np.abs(np.array(xs) - u).max(axis=1).min()
        evaluate(u, it)
        it += 1
        near_misses = near_misses + 1 if dist < EARLY_STOP_TOL else 0
        if near_misses >= EARLY_STOP_RUNS:
            break

    best_i = int(np.argmax(ys))
    return space.decode(xs[best_i]), history


def save_bo_history(history, space: SearchSpace, path) -> None:
    """CSV: iter,<encoded coords>,value,best_so_far."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["iter"] + [f"u_{n}" for n in space.names]
                   + ["value", "best_so_far"])
        for rec in history:
            w.writerow([rec["iter"]] + [repr(v) for v in rec["point"]]
                       + [repr(rec["value"]), repr(rec["best_so_far"])])
