"""Hellinger nets, projection, batch net-MLE, sequential forecasting, rates.

Model classes are explicit finite candidate lists (parameter grids of
atomic mixtures); covers are greedy farthest-point, which yields a set
that is simultaneously an epsilon-cover of the candidates and an
epsilon-packing, hence within the usual packing/covering sandwich of the
optimum.  All tie-breaks are first-index so results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergences import DivergenceKind, divergence
from .errors import HypothesisError
from .mixtures import GaussianMixture, mixture_to_record


def hellinger(p: GaussianMixture, q: GaussianMixture, tol=None) -> float:
    """Hellinger distance H = sqrt(H^2) via the certified quadrature."""
    return math.sqrt(max(divergence(DivergenceKind.HellingerSq, p, q, tol=tol).value, 0.0))


class _DistCache:
    """Memoized symmetric Hellinger distances over a fixed candidate list."""

    def __init__(self, elements, tol=None):
        self.elements = list(elements)
        self.tol = tol
        self._d = {}

    def dist(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        key = (min(i, j), max(i, j))
        if key not in self._d:
            self._d[key] = hellinger(self.elements[key[0]], self.elements[key[1]], self.tol)
        return self._d[key]

    def column(self, i: int) -> np.ndarray:
        return np.array([self.dist(i, j) for j in range(len(self.elements))])


def pairwise_hellinger(elements, tol=None) -> np.ndarray:
    """Symmetric matrix of pairwise Hellinger distances, zero diagonal."""
    cache = _DistCache(elements, tol)
    n = len(elements)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = cache.dist(i, j)
    return out


@dataclass
class Net:
    """A finite Hellinger epsilon-cover with its pairwise-distance cache."""

    elements: list
    radius: float
    distance_cache: np.ndarray

    def __len__(self):
        return len(self.elements)


def greedy_cover(candidates, eps: float, tol=None) -> Net:
    """Farthest-point greedy epsilon-cover of the candidates.

    Starts from index 0 and repeatedly promotes the candidate farthest from
    the current centers until everything is within eps.  The output is also
    eps-separated, so its size is at most the eps/2-covering's packing bound.
    """
    if eps <= 0:
        raise HypothesisError(f"cover radius must be positive, got {eps}")
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidate list must be non-empty")
    cache = _DistCache(candidates, tol)
    centers = [0]
    mindist = cache.column(0)
    while True:
        far = int(np.argmax(mindist))
        if mindist[far] <= eps:
            break
        centers.append(far)
        mindist = np.minimum(mindist, cache.column(far))
    elems = [candidates[i] for i in centers]
    m = len(centers)
    dc = np.zeros((m, m))
    for a in range(m):
        for b in range(a + 1, m):
            dc[a, b] = dc[b, a] = cache.dist(centers[a], centers[b])
    return Net(elements=elems, radius=eps, distance_cache=dc)


def local_cover(candidates, center: GaussianMixture, eta: float, tol=None) -> Net:
    """Cover of the Hellinger ball B(center, eta) among candidates at radius eta/2."""
    if eta <= 0:
        raise HypothesisError(f"ball radius must be positive, got {eta}")
    candidates = list(candidates)
    ball = [
        c
        for c in candidates
        if (0.0 if c is center else hellinger(center, c, tol)) <= eta
    ]
    if not ball:
        return Net(elements=[], radius=eta / 2.0, distance_cache=np.zeros((0, 0)))
    return greedy_cover(ball, eta / 2.0, tol)


def local_covering_number(candidates, eps: float, eta_grid, centers=None, tol=None) -> int:
    """sup over supplied centers and eta >= eps of |cover(B(center, eta), eta/2)|.

    The sup runs over the supplied eta grid only (the continuum sup is not
    desk-realizable); callers should flag that in downstream reports.
    """
    if eps <= 0:
        raise HypothesisError(f"epsilon must be positive, got {eps}")
    if centers is None:
        centers = candidates
    best = 0
    for eta in eta_grid:
        if eta < eps:
            continue
        for c in centers:
            best = max(best, len(local_cover(candidates, c, eta, tol)))
    return best


def hellinger_project(f: GaussianMixture, net: Net, tol=None) -> GaussianMixture:
    """Nearest net element to f in Hellinger distance (first-index ties).

    Projection at most doubles the distance to anything the net covers:
    H(project(f), g) <= 2 H(f, g) whenever some net element is within
    H(f, g) of f.
    """
    if not net.elements:
        raise ValueError("net must be non-empty")
    dists = [hellinger(e, f, tol) for e in net.elements]
    return net.elements[int(np.argmin(dists))]


def batch_net_mle(net: Net, data) -> GaussianMixture:
    """Net element maximizing the sample log-likelihood (first-index ties)."""
    if not net.elements:
        raise ValueError("net must be non-empty")
    pts = np.atleast_2d(np.asarray(data, dtype=float))
    if pts.shape[0] < 1:
        raise ValueError("data must be non-empty")
    scores = [float(np.sum(e.log_density(pts))) for e in net.elements]
    return net.elements[int(np.argmax(scores))]


@dataclass
class ForecastResult:
    """Per-step state of the Bayesian mixture forecaster.

    predictive_weights[t] is the weight vector used to predict X_t (uniform
    prior times the likelihood of X_1..X_{t-1}); step_log_loss[t] is
    -log(predictive density at X_t); regret_vs_best compares cumulative log
    loss against the best single net element and never exceeds log(len(net)).
    """

    predictive_weights: np.ndarray
    step_log_loss: np.ndarray
    cum_regret: float | None
    regret_vs_best: float


def sequential_forecaster(net: Net, stream, true_density: GaussianMixture | None = None):
    """Uniform-prior Bayesian mixture over the net, updated per observation."""
    if not net.elements:
        raise ValueError("net must be non-empty")
    pts = np.atleast_2d(np.asarray(stream, dtype=float))
    n_steps = pts.shape[0]
    n_el = len(net.elements)
    loglik = np.stack([e.log_density(pts) for e in net.elements], axis=1)  # (T, N)
    lw = np.full(n_el, -math.log(n_el))
    weights = np.empty((n_steps, n_el))
    pred = np.empty(n_steps)
    for t in range(n_steps):
        weights[t] = np.exp(lw)
        row = lw + loglik[t]
        m = row.max()
        pred[t] = m + math.log(np.sum(np.exp(row - m)))
        lw = row - pred[t]
    regret_vs_best = float(np.max(np.sum(loglik, axis=0)) - np.sum(pred))
    cum_regret = None
    if true_density is not None:
        cum_regret = float(np.sum(true_density.log_density(pts) - pred))
    return ForecastResult(
        predictive_weights=weights,
        step_log_loss=-pred,
        cum_regret=cum_regret,
        regret_vs_best=regret_vs_best,
    )


@dataclass
class RateFunctional:
    """Exact grid minimum of an entropy rate objective.

    local=True:  batch objective  eps^2 + log(N_loc(eps)) / n
    local=False: sequential objective  n eps^2 + log(N(eps))
    """

    epsilons: np.ndarray
    log_cover: np.ndarray
    n: int
    local: bool
    objective: np.ndarray
    eps_star: float
    value: float

    def to_dict(self) -> dict:
        return {
            "epsilons": [float(e) for e in self.epsilons],
            "log_cover": [float(v) for v in self.log_cover],
            "n": self.n,
            "local": self.local,
            "objective": [float(v) for v in self.objective],
            "eps_star": self.eps_star,
            "value": self.value,
        }


def rate_functional(epsilons, cover_sizes, n: int, local: bool) -> RateFunctional:
    """Minimize the batch or sequential entropy objective over the grid."""
    eps = np.asarray(list(epsilons), dtype=float)
    sizes = np.asarray(list(cover_sizes), dtype=float)
    if eps.size == 0 or eps.size != sizes.size:
        raise ValueError("epsilon grid and cover sizes must be non-empty and aligned")
    if np.any(sizes < 1):
        raise ValueError("cover sizes must be >= 1")
    if n < 1:
        raise ValueError("sample size must be >= 1")
    log_cover = np.log(sizes)
    if local:
        objective = eps**2 + log_cover / n
    else:
        objective = n * eps**2 + log_cover
    j = int(np.argmin(objective))
    return RateFunctional(
        epsilons=eps,
        log_cover=log_cover,
        n=n,
        local=bool(local),
        objective=objective,
        eps_star=float(eps[j]),
        value=float(objective[j]),
    )


def batch_risk_mc(candidates, net: Net, n: int, trials: int, seed: int, tol=None) -> dict:
    """Monte Carlo worst-case batch risk of the net MLE over the candidates.

    For each candidate as truth, draws `trials` samples of size n, runs the
    net MLE, and averages the squared Hellinger loss; reports per-candidate
    means with 95% half-widths and their maximum.  This is a measurement,
    not an assertion against any rate characterization.
    """
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be positive")
    loss = {}
    for i, f in enumerate(candidates):
        for j, e in enumerate(net.elements):
            loss[(i, j)] = divergence(DivergenceKind.HellingerSq, e, f, tol=tol).value
    element_index = {id(e): j for j, e in enumerate(net.elements)}
    rows = []
    for i, f in enumerate(candidates):
        losses = np.empty(trials)
        for t in range(trials):
            child_seed = int(np.random.SeedSequence([seed, i, t]).generate_state(1)[0])
            data = f.sample(n, child_seed)
            est = batch_net_mle(net, data)
            losses[t] = loss[(i, element_index[id(est)])]
        rows.append(
            {
                "candidate": i,
                "mean_h2": float(np.mean(losses)),
                "half_width": float(1.96 * np.std(losses) / math.sqrt(trials)),
            }
        )
    worst = max(rows, key=lambda r: r["mean_h2"])
    return {"per_candidate": rows, "risk": worst["mean_h2"], "half_width": worst["half_width"]}


def net_to_json(net: Net) -> dict:
    """JSON-ready serialization of a net (elements as mixture records)."""
    return {
        "radius": net.radius,
        "elements": [mixture_to_record(e.mixing) for e in net.elements],
        "distance_cache": [[float(v) for v in row] for row in net.distance_cache],
    }
