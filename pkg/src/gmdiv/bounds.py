"""Closed-form comparison bounds and randomized verification sweeps.

Every comparison inequality between divergences of Gaussian mixtures that
this package tracks has an identifier in `BoundId`; `bound_rhs` evaluates
the right-hand side exactly as printed in its source statement, and
`verify_sweep` draws seeded random mixture pairs from the matching class
and checks lhs <= rhs instance by instance, with slack derived from the
certified truncation bounds so a quadrature artifact can never produce a
false failure.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .divergences import DivergenceKind, _compute_divergences
from .errors import HypothesisError
from .mixtures import (
    ClassTag,
    Compact,
    DichotomyParams,
    GaussianMixture,
    MixingDistribution,
    Subgaussian,
)
from .textio import format_float, write_csv

# The proof of the dimension-free compact bound ends with this constant in
# front of M^2 H^2; the statement uses 200, which is what sweeps test.
THM2_PROOF_CONSTANT = 97.0


class BoundId(enum.Enum):
    Thm1 = "Thm1"
    Thm2 = "Thm2"
    Thm3 = "Thm3"
    Thm5 = "Thm5"
    ChiSqThm = "ChiSqThm"
    TVfromL2 = "TVfromL2"
    L2fromTV = "L2fromTV"
    HO = "HO"
    DichotomyKL_LB = "DichotomyKL_LB"
    DichotomyH2_UB = "DichotomyH2_UB"
    LemFormula = "LemFormula"


_REQUIRED_PARAMS = {
    BoundId.Thm1: {"M", "d", "h2"},
    BoundId.Thm2: {"M", "h2"},
    BoundId.Thm3: {"K", "d", "h2"},
    BoundId.Thm5: {"K", "h2"},
    BoundId.ChiSqThm: {"M", "d", "h2"},
    BoundId.TVfromL2: {"M", "l2"},
    BoundId.L2fromTV: {"tv"},
    BoundId.HO: {"delta", "lam", "h2", "renyi"},
    BoundId.DichotomyKL_LB: {"K", "r"},
    BoundId.DichotomyH2_UB: {"K", "r"},
    BoundId.LemFormula: {"t", "M"},
}


def _check_h2(h2: float, upper: float = 2.0):
    if not (0.0 < h2 <= upper):
        raise HypothesisError(f"H^2 must lie in (0, {upper}], got {h2}")


def bound_rhs(bound, **params) -> float:
    """Right-hand side of the identified bound, exactly as stated.

    Each id takes exactly the symbols of its statement (M, d, K, h2, tv,
    l2, ...); out-of-range parameters raise HypothesisError naming the
    violated hypothesis.  ChiSqThm overflows float64 once M >= 4; use
    bound_rhs_log for that comparison.
    """
    bound = BoundId(bound)
    need = _REQUIRED_PARAMS[bound]
    got = set(params)
    if got != need:
        raise ValueError(
            f"{bound.value} takes parameters {sorted(need)}, got {sorted(got)}"
        )
    if bound is BoundId.Thm1:
        M, d, h2 = params["M"], params["d"], params["h2"]
        if M < 2:
            raise HypothesisError(f"Thm1 requires M >= 2, got M={M}")
        _check_h2(h2)
        return 5154.0 * max(M * M, d) * h2
    if bound is BoundId.Thm2:
        M, h2 = params["M"], params["h2"]
        if M < 1:
            raise HypothesisError(f"Thm2 requires M >= 1, got M={M}")
        _check_h2(h2)
        return 200.0 * M * M * h2 + 16.0 * h2 * math.log(1.0 / h2)
    if bound is BoundId.Thm3:
        K, d, h2 = params["K"], params["d"], params["h2"]
        if not (0 < K < 1):
            raise HypothesisError(f"Thm3 requires 0 < K < 1, got K={K}")
        _check_h2(h2)
        return 1660056.0 * max(1.0 / (1.0 - K) ** 3, 8.0 * d**3) * h2
    if bound is BoundId.Thm5:
        K, h2 = params["K"], params["h2"]
        if K < 0:
            raise HypothesisError(f"Thm5 requires K >= 0, got K={K}")
        _check_h2(h2, upper=4.0)
        return (10240.0 * K**4 + 652.0) * h2 * math.log(4.0 / h2)
    if bound is BoundId.ChiSqThm:
        log_rhs = bound_rhs_log(bound, **params)
        return math.exp(log_rhs) if log_rhs < 709.0 else math.inf
    if bound is BoundId.TVfromL2:
        M, l2 = params["M"], params["l2"]
        if M < 1:
            raise HypothesisError(f"TVfromL2 requires M >= 1, got M={M}")
        if not (0 < l2 < 1):
            raise HypothesisError(f"TVfromL2 requires 0 < ||p-q||_2 < 1, got {l2}")
        return (8.0 * math.sqrt(M) + 2.0 * math.log(1.0 / l2) ** 0.25) * l2
    if bound is BoundId.L2fromTV:
        tv = params["tv"]
        if not (0 < tv <= 1):
            raise HypothesisError(f"L2fromTV requires 0 < TV <= 1, got {tv}")
        return max(math.log(1.0 / tv) ** 0.25, 3.0) * tv
    if bound is BoundId.HO:
        return ho_bound(params["delta"], params["lam"], params["h2"], params["renyi"])
    if bound is BoundId.DichotomyKL_LB:
        return dichotomy_bounds(DichotomyParams(params["K"], params["r"])).kl_lb
    if bound is BoundId.DichotomyH2_UB:
        return dichotomy_bounds(DichotomyParams(params["K"], params["r"])).h2_ub
    if bound is BoundId.LemFormula:
        return lem_formula_gap(params["t"], params["M"]).rhs
    raise ValueError(f"unhandled bound {bound!r}")


def bound_rhs_log(bound, **params) -> float:
    """Natural log of bound_rhs; exact in log domain for ChiSqThm."""
    bound = BoundId(bound)
    if bound is BoundId.ChiSqThm:
        M, d, h2 = params["M"], params["d"], params["h2"]
        if M < 2:
            raise HypothesisError(f"ChiSqThm requires M >= 2, got M={M}")
        _check_h2(h2)
        return math.log(2.0) + 50.0 * max(M * M, d) + math.log(h2)
    value = bound_rhs(bound, **params)
    if value <= 0:
        return -math.inf
    return math.log(value)


def ho_bound(delta: float, lam: float, h2: float, renyi: float) -> float:
    """Change-of-measure assembly bounding KL by H^2 plus a power integral.

    Value: 2 log(1/d)/(1-d)^2 * h2 + 4 d log(1/d)/(1-d)^2 + d^((lam-1)/2) * renyi.
    Requires 0 < delta < e^(-1/2), lam > 1, and the compatibility condition
    loglog(1/delta)/log(1/delta) <= (lam-1)/2 (automatic for lam = 3 and
    any delta < 1/2).
    """
    if not (0.0 < delta < math.exp(-0.5)):
        raise HypothesisError(
            f"delta must lie in (0, e^(-1/2)) ~ (0, 0.6065), got {delta}"
        )
    if lam <= 1:
        raise HypothesisError(f"lambda must exceed 1, got {lam}")
    big_l = math.log(1.0 / delta)
    if math.log(big_l) / big_l > (lam - 1.0) / 2.0:
        raise HypothesisError(
            f"condition loglog(1/delta)/log(1/delta) <= (lambda-1)/2 fails for "
            f"delta={delta}, lambda={lam}"
        )
    denom = (1.0 - delta) ** 2
    return 2.0 * big_l / denom * h2 + 4.0 * delta * big_l / denom + delta ** (
        (lam - 1.0) / 2.0
    ) * renyi


def lambda_star(K: float) -> float:
    """The exponent with lam*(lam-1) = 1/(4K^2): lam = (1 + sqrt(1 + 1/K^2))/2."""
    if not (K > 0):
        raise HypothesisError(f"K must be positive, got {K}")
    return 0.5 * (1.0 + math.sqrt(1.0 + 1.0 / (K * K)))


def delta_star(lam: float, h2: float) -> float:
    """delta = (h2/4)^(max(8/(lam-1)^2, 1)); satisfies delta <= h2/4 <= 1/2."""
    if lam <= 1:
        raise HypothesisError(f"lambda must exceed 1, got {lam}")
    if not (0.0 < h2 <= 2.0):
        raise HypothesisError(f"H^2 must lie in (0, 2], got {h2}")
    return (h2 / 4.0) ** max(8.0 / (lam - 1.0) ** 2, 1.0)


@dataclass(frozen=True)
class DichotomyBoundValues:
    kl_lb: float
    h2_ub: float


def dichotomy_bounds(params: DichotomyParams) -> DichotomyBoundValues:
    """One-sided certificates for the two-atom family against N(0,1):

    KL >= (r^2/10 - r^2/(10 K^2) - 3/10) h_r,  H^2 <= (2 + 2r) h_r.
    """
    K, r, h_r = params.K, params.r, params.h_r
    kl_lb = (r * r / 10.0 - r * r / (10.0 * K * K) - 0.3) * h_r
    h2_ub = (2.0 + 2.0 * r) * h_r
    return DichotomyBoundValues(kl_lb=kl_lb, h2_ub=h2_ub)


@dataclass(frozen=True)
class LemFormulaGap:
    lhs: float
    rhs: float
    g: float
    log_lhs: float
    log_rhs: float


def lem_formula_gap(t: float | None = None, M: float = 1.0, log_t: float | None = None):
    """Both sides of  t log t - t + 1 <= 9 M^2 (sqrt(t) - 1)^2  on [0, e^(8M^2)].

    Also exposes g(t) = lhs / (sqrt(t)-1)^2 (NaN at t = 1), which is
    non-decreasing in t.  Supply log_t instead of t to stay in log domain
    when t would overflow; lhs/rhs are then +inf but g and the log fields
    remain exact.
    """
    if (t is None) == (log_t is None):
        raise ValueError("supply exactly one of t, log_t")
    if M < 1:
        raise HypothesisError(f"the t log t inequality requires M >= 1, got M={M}")
    cap = 8.0 * M * M
    if log_t is not None:
        if log_t > cap:
            raise HypothesisError(f"log t = {log_t} exceeds the hypothesis cap 8M^2 = {cap}")
        lt = float(log_t)
        t = math.exp(lt) if lt < 700.0 else math.inf
    else:
        if t < 0:
            raise HypothesisError(f"t must be nonnegative, got {t}")
        if t > 0 and math.log(t) > cap * (1.0 + 1e-12):
            raise HypothesisError(f"t = {t} exceeds the hypothesis cap exp(8M^2)")
        lt = math.log(t) if t > 0 else -math.inf

    if t == 0.0:
        lhs, sq = 1.0, 1.0
        log_lhs, log_sq = 0.0, 0.0
    elif math.isfinite(t):
        s = t - 1.0
        lhs = (1.0 + s) * math.log1p(s) - s
        root = math.sqrt(t)
        sq = (s / (root + 1.0)) ** 2
        log_lhs = math.log(lhs) if lhs > 0 else -math.inf
        log_sq = math.log(sq) if sq > 0 else -math.inf
    else:
        # t too large for a double: lhs ~ t(log t - 1), (sqrt t - 1)^2 ~ t
        lhs = math.inf
        sq = math.inf
        log_lhs = lt + math.log(lt - 1.0)
        log_sq = lt + 2.0 * math.log1p(-math.exp(-0.5 * lt))
    rhs = 9.0 * M * M * sq
    log_rhs = math.log(9.0 * M * M) + log_sq
    g = math.nan if t == 1.0 else (lhs / sq if math.isfinite(lhs) else math.exp(log_lhs - log_sq))
    return LemFormulaGap(lhs=lhs, rhs=rhs, g=g, log_lhs=log_lhs, log_rhs=log_rhs)


# -- randomized verification sweeps ---------------------------------------------


@dataclass(frozen=True)
class InstanceFamily:
    """Random-instance family for a sweep: class tag, dimension, atom budget."""

    tag: ClassTag
    d: int = 1
    max_atoms: int = 8

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not (1 <= self.max_atoms <= 64):
            raise ValueError(f"max_atoms must lie in [1, 64], got {self.max_atoms}")


@dataclass(frozen=True)
class SweepInstance:
    seed: int
    index: int
    params: dict
    lhs: float
    rhs: float
    ratio: float
    passed: bool
    kl_ge_h2: bool
    chi2_ge_kl: bool | None


@dataclass(frozen=True)
class SweepReport:
    bound: BoundId
    seed: int
    instances: list[SweepInstance] = field(repr=False)
    max_ratio: float
    argmax_index: int
    failures: int
    ordering_failures: int

    CSV_HEADER = (
        "seed",
        "index",
        "M",
        "K",
        "d",
        "natoms_p",
        "natoms_q",
        "lhs",
        "rhs",
        "ratio",
        "pass",
    )

    def csv_rows(self):
        for inst in self.instances:
            p = inst.params
            yield (
                inst.seed,
                inst.index,
                "" if p.get("M") is None else format_float(p["M"]),
                "" if p.get("K") is None else format_float(p["K"]),
                p["d"],
                p["natoms_p"],
                p["natoms_q"],
                inst.lhs,
                inst.rhs,
                inst.ratio,
                inst.passed,
            )

    def write_csv(self, path):
        write_csv(path, self.CSV_HEADER, self.csv_rows())

    def summary(self) -> dict:
        return {
            "bound": self.bound.value,
            "seed": self.seed,
            "n": len(self.instances),
            "failures": self.failures,
            "ordering_failures": self.ordering_failures,
            "max_ratio": self.max_ratio,
            "argmax_index": self.argmax_index,
            "argmax_params": (
                self.instances[self.argmax_index].params if self.instances else None
            ),
        }


_SWEEPABLE = {
    BoundId.Thm1: ("compact", 2.0),
    BoundId.Thm2: ("compact", 1.0),
    BoundId.Thm3: ("subgaussian<1", None),
    BoundId.Thm5: ("subgaussian", None),
    BoundId.ChiSqThm: ("compact", 2.0),
    BoundId.TVfromL2: ("compact", 1.0),
    BoundId.L2fromTV: ("any", None),
}


def _check_family(bound: BoundId, family: InstanceFamily):
    if bound not in _SWEEPABLE:
        raise HypothesisError(f"{bound.value} is not a sweepable comparison bound")
    req, min_m = _SWEEPABLE[bound]
    tag = family.tag
    if req == "compact":
        if not isinstance(tag, Compact):
            raise HypothesisError(f"{bound.value} requires a Compact(M) family")
        if tag.M < min_m:
            raise HypothesisError(f"{bound.value} requires M >= {min_m}, got M={tag.M}")
    elif req == "subgaussian<1":
        if not isinstance(tag, Subgaussian) or not (tag.K < 1):
            raise HypothesisError(f"{bound.value} requires a Subgaussian(K < 1) family")
    elif req == "subgaussian":
        if not isinstance(tag, Subgaussian):
            raise HypothesisError(f"{bound.value} requires a Subgaussian(K) family")
    if bound in (BoundId.TVfromL2, BoundId.L2fromTV) and family.d != 1:
        raise HypothesisError(f"{bound.value} is a one-dimensional comparison")


def _sample_compact(rng, M: float, d: int, max_atoms: int) -> MixingDistribution:
    k = int(rng.integers(1, max_atoms + 1))
    dirs = rng.standard_normal((k, d))
    norms = np.sqrt(np.sum(dirs * dirs, axis=1))
    norms[norms < 1e-12] = 1.0
    radii = M * rng.random(k) ** (1.0 / d)
    locs = dirs / norms[:, None] * radii[:, None]
    w = rng.dirichlet(np.ones(k))
    w = np.maximum(w, 1e-9)
    w /= w.sum()
    return MixingDistribution(locs, w, Compact(M))


def _sample_subgaussian(rng, K: float, d: int, max_atoms: int) -> MixingDistribution:
    # an atomic K-subgaussian law must put mass at the origin; draw the rest
    # Gaussian and repair weights outer-to-inner so every step-tail
    # constraint holds with margin
    k = int(rng.integers(1, max_atoms + 1))
    locs = np.zeros((k, d))
    if k > 1:
        locs[1:] = rng.standard_normal((k - 1, d)) * (K / 2.0)
    w = rng.dirichlet(np.ones(k))
    w = np.maximum(w, 1e-9)
    w /= w.sum()
    radii = np.sqrt(np.sum(locs * locs, axis=1))
    order = np.argsort(radii)[::-1]
    cum = 0.0
    for j in order:
        s = radii[j]
        if s <= 0:
            continue
        cap = math.exp(-s * s / (2.0 * K * K)) * (1.0 - 1e-9) - cum
        if w[j] > cap:
            w[j] = max(cap, 0.0)
        cum += w[j]
    w[0] += 1.0 - w.sum()
    keep = w > 0
    locs, w = locs[keep], w[keep]
    w = w / w.sum()
    return MixingDistribution(locs, w, Subgaussian(K))


def _sample_mixing(rng, family: InstanceFamily) -> MixingDistribution:
    tag = family.tag
    if isinstance(tag, Compact):
        return _sample_compact(rng, tag.M, family.d, family.max_atoms)
    if isinstance(tag, Subgaussian):
        return _sample_subgaussian(rng, tag.K, family.d, family.max_atoms)
    raise HypothesisError("sweep families must be Compact or Subgaussian")


def _standard_normal_mixing(family: InstanceFamily) -> MixingDistribution:
    return MixingDistribution(
        np.zeros((1, family.d)), np.array([1.0]), family.tag
    )


def make_pair(seed: int, index: int, family: InstanceFamily):
    """The (p, q) mixture pair of a sweep instance; deterministic in (seed, index).

    Every 10th instance forces q to the standard Gaussian (the
    dichotomy-adjacent regime) and every 50th (offset 1) sets q = p.
    """
    rng = np.random.default_rng([seed, index])
    p_mix = _sample_mixing(rng, family)
    if index % 10 == 0:
        q_mix = _standard_normal_mixing(family)
    elif index % 50 == 1:
        q_mix = p_mix
    else:
        q_mix = _sample_mixing(rng, family)
    return GaussianMixture(p_mix), GaussianMixture(q_mix)


_KINDS_FOR = {
    BoundId.Thm1: [DivergenceKind.KL, DivergenceKind.HellingerSq],
    BoundId.Thm2: [DivergenceKind.KL, DivergenceKind.HellingerSq],
    BoundId.Thm3: [DivergenceKind.KL, DivergenceKind.HellingerSq],
    BoundId.Thm5: [DivergenceKind.KL, DivergenceKind.HellingerSq],
    BoundId.ChiSqThm: [DivergenceKind.KL, DivergenceKind.HellingerSq, DivergenceKind.ChiSq],
    BoundId.TVfromL2: [
        DivergenceKind.KL,
        DivergenceKind.HellingerSq,
        DivergenceKind.TV,
        DivergenceKind.L2Sq,
    ],
    BoundId.L2fromTV: [
        DivergenceKind.KL,
        DivergenceKind.HellingerSq,
        DivergenceKind.TV,
        DivergenceKind.L2Sq,
    ],
}


def _slack(est_a, est_b) -> float:
    return 2.0 * (est_a.truncation_bound + est_b.truncation_bound) + 1e-9


def _one_instance(bound: BoundId, family: InstanceFamily, seed: int, index: int, tol):
    p, q = make_pair(seed, index, family)
    est = _compute_divergences(_KINDS_FOR[bound], p, q, tol=tol)
    kl = est[DivergenceKind.KL]
    h2 = est[DivergenceKind.HellingerSq]
    params = {
        "M": family.tag.M if isinstance(family.tag, Compact) else None,
        "K": family.tag.K if isinstance(family.tag, Subgaussian) else None,
        "d": family.d,
        "natoms_p": p.mixing.n_atoms,
        "natoms_q": q.mixing.n_atoms,
    }

    kl_ge_h2 = h2.value <= kl.value + _slack(kl, h2)
    chi2_ge_kl = None

    if bound in (BoundId.Thm1, BoundId.Thm2, BoundId.Thm3, BoundId.Thm5):
        lhs, lhs_est, arg_est = kl.value, kl, h2
        if h2.value <= 0:
            rhs = 0.0
        elif bound is BoundId.Thm1:
            rhs = bound_rhs(bound, M=family.tag.M, d=family.d, h2=h2.value)
        elif bound is BoundId.Thm2:
            rhs = bound_rhs(bound, M=family.tag.M, h2=h2.value)
        elif bound is BoundId.Thm3:
            rhs = bound_rhs(bound, K=family.tag.K, d=family.d, h2=h2.value)
        else:
            rhs = bound_rhs(bound, K=family.tag.K, h2=h2.value)
        slack = _slack(lhs_est, arg_est)
        passed = lhs <= rhs + slack
        ratio = lhs / rhs if rhs > 0 else math.nan
    elif bound is BoundId.ChiSqThm:
        chi = est[DivergenceKind.ChiSq]
        chi2_ge_kl = kl.value <= chi.value + _slack(chi, kl)
        lhs = chi.value
        slack = _slack(chi, h2)
        if h2.value <= 0:
            rhs, passed, ratio = 0.0, lhs <= slack, math.nan
        else:
            log_rhs = bound_rhs_log(bound, M=family.tag.M, d=family.d, h2=h2.value)
            rhs = math.exp(log_rhs) if log_rhs < 709.0 else math.inf
            passed = lhs <= slack or math.log(lhs) <= log_rhs + 1e-12
            ratio = math.exp(math.log(lhs) - log_rhs) if lhs > 0 else 0.0
    elif bound is BoundId.TVfromL2:
        tv = est[DivergenceKind.TV]
        l2sq = est[DivergenceKind.L2Sq]
        l2 = math.sqrt(max(l2sq.value, 0.0))
        lhs = tv.value
        rhs = 0.0 if l2 <= 0 else bound_rhs(bound, M=family.tag.M, l2=l2)
        slack = _slack(tv, l2sq)
        passed = lhs <= rhs + slack
        ratio = lhs / rhs if rhs > 0 else math.nan
    elif bound is BoundId.L2fromTV:
        tv = est[DivergenceKind.TV]
        l2sq = est[DivergenceKind.L2Sq]
        lhs = math.sqrt(max(l2sq.value, 0.0))
        rhs = 0.0 if tv.value <= 0 else bound_rhs(bound, tv=tv.value)
        slack = _slack(l2sq, tv)
        passed = lhs <= rhs + slack
        ratio = lhs / rhs if rhs > 0 else math.nan
    else:  # pragma: no cover - guarded by _check_family
        raise HypothesisError(f"{bound.value} is not sweepable")

    return SweepInstance(
        seed=seed,
        index=index,
        params=params,
        lhs=float(lhs),
        rhs=float(rhs),
        ratio=float(ratio),
        passed=bool(passed),
        kl_ge_h2=bool(kl_ge_h2),
        chi2_ge_kl=chi2_ge_kl,
    )


def verify_sweep(
    bound,
    family: InstanceFamily,
    n: int,
    seed: int,
    tol: float | None = None,
    threads: int = 1,
) -> SweepReport:
    """Check a comparison bound on n seeded random pairs from a family.

    Instances derive their RNG from (seed, index), so the report is
    deterministic for any thread count.  A failure means lhs exceeded the
    stated rhs by more than the certified numerical slack.
    """
    bound = BoundId(bound)
    _check_family(bound, family)
    if n < 1:
        raise ValueError(f"sweep size must be positive, got {n}")

    def job(i):
        return _one_instance(bound, family, seed, i, tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            instances = list(pool.map(job, range(n)))
    else:
        instances = [job(i) for i in range(n)]

    ratios = [inst.ratio for inst in instances if math.isfinite(inst.ratio)]
    if ratios:
        max_ratio = max(ratios)
        argmax_index = next(
            inst.index for inst in instances if inst.ratio == max_ratio
        )
    else:
        max_ratio, argmax_index = math.nan, -1
    failures = sum(not inst.passed for inst in instances)
    ordering_failures = sum(
        (not inst.kl_ge_h2) + (inst.chi2_ge_kl is False) for inst in instances
    )
    return SweepReport(
        bound=bound,
        seed=seed,
        instances=instances,
        max_ratio=max_ratio,
        argmax_index=argmax_index,
        failures=failures,
        ordering_failures=ordering_failures,
    )
