"""The K > 1 blow-up: KL/H^2 is unbounded over subgaussian mixing laws.

The two-atom family (1-h_r) delta_0 + h_r delta_r with h_r = e^{-r^2/2K^2}
is exactly K-subgaussian, yet against the standard Gaussian its KL grows
like r^2 h_r while H^2 only grows like r h_r, so the ratio climbs
linearly in r.  The table prints the computed divergences next to the
one-sided envelopes

    KL >= (r^2/10 - r^2/(10K^2) - 3/10) h_r,     H^2 <= (2 + 2r) h_r,

which certify the blow-up without any quadrature.  For contrast, the last
block samples K = 1/2 pairs where KL / H^2 stays at a small constant.
"""

import numpy as np

from gmdiv import (
    DivergenceKind,
    GaussianMixture,
    InstanceFamily,
    Subgaussian,
    dichotomy_bounds,
    dichotomy_family,
    divergence,
)
from gmdiv.bounds import make_pair
from gmdiv.divergences import _compute_divergences
from gmdiv.mixtures import DichotomyParams


def main():
    K = 2.0
    reference = GaussianMixture.from_atoms([[0.0]], tag=Subgaussian(K))
    print(f"K = {K} (blow-up regime)")
    print(f"{'r':>4} {'KL':>12} {'kl_lb':>12} {'H^2':>12} {'h2_ub':>12} {'KL/H^2':>8}")
    for r in (3.0, 5.0, 8.0, 10.0, 12.0, 15.0):
        gm = GaussianMixture(dichotomy_family(K, r))
        kl = divergence(DivergenceKind.KL, gm, reference).value
        h2 = divergence(DivergenceKind.HellingerSq, gm, reference).value
        env = dichotomy_bounds(DichotomyParams(K, r))
        print(
            f"{r:>4.0f} {kl:>12.4e} {env.kl_lb:>12.4e} {h2:>12.4e} "
            f"{env.h2_ub:>12.4e} {kl / h2:>8.2f}"
        )

    print()
    print("K = 1/2 (comparable regime): random subgaussian pairs")
    family = InstanceFamily(Subgaussian(0.5), d=1)
    ratios = []
    for i in range(30):
        p, q = make_pair(7, i, family)
        est = _compute_divergences([DivergenceKind.KL, DivergenceKind.HellingerSq], p, q)
        h2 = est[DivergenceKind.HellingerSq].value
        if h2 > 1e-12:
            ratios.append(est[DivergenceKind.KL].value / h2)
    print(f"KL/H^2 over {len(ratios)} pairs: max {max(ratios):.2f}, mean {np.mean(ratios):.2f}")


if __name__ == "__main__":
    main()
