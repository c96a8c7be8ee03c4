"""Choice-probability kernels for the supported demand models.

Every kernel works on plain numbers for the members of an assortment,
listed in increasing item-id order, and returns ``(outside, shares)`` where
``shares[a]`` is the purchase probability of the ``a``-th member. The
``*_phi`` wrappers pick out a single entry; pass ``i=None`` for the outside
option.

The model-spec classes in :mod:`seqassort.choice` call these kernels after
extracting the demand parameters of the offered items.
"""

from __future__ import annotations

import itertools
import math
from typing import Mapping, Sequence

from seqassort.errors import ShadowExceedsAttraction, SupportTooLarge

UtilityDist = Sequence[tuple[float, float]]  # (probability, utility) atoms

DEFAULT_RUM_ATOM_LIMIT = 10**7


def _pick(outside: float, shares: Sequence[float], i: int | None) -> float:
    return outside if i is None else shares[i]


# ---------------------------------------------------------------------------
# MNL
# ---------------------------------------------------------------------------


def mnl_shares(v0: float, attractions: Sequence[float]) -> tuple[float, list[float]]:
    # v0 = 0 and v(S) = 0: all mass on the outside option (no 0/0)
    denom = v0 + math.fsum(attractions)
    if denom == 0.0:
        return 1.0, [0.0] * len(attractions)
    return v0 / denom, [v / denom for v in attractions]


def mnl_shares_log(log_v0: float, log_attractions: Sequence[float]) -> tuple[float, list[float]]:
    """MNL shares from log-attractions, normalized after shifting by the max.

    Use this when attractions overflow doubles. ``-inf`` encodes a zero
    attraction.
    """
    top = max([log_v0, *log_attractions])
    if top == -math.inf:
        return 1.0, [0.0] * len(log_attractions)
    w0 = math.exp(log_v0 - top)
    ws = [math.exp(x - top) for x in log_attractions]
    denom = w0 + math.fsum(ws)
    return w0 / denom, [w / denom for w in ws]


def mnl_phi(v0: float, attractions: Sequence[float], i: int | None) -> float:
    """φ(i, S) = v_i / (v0 + v(S)); ``i`` indexes ``attractions``."""
    outside, shares = mnl_shares(v0, attractions)
    return _pick(outside, shares, i)


# ---------------------------------------------------------------------------
# GAM
# ---------------------------------------------------------------------------


def gam_shares(
    v0: float, shadow_outside: float, attractions: Sequence[float], shadows: Sequence[float]
) -> tuple[float, list[float]]:
    """GAM shares given the total shadow attraction of the items not offered."""
    for v, w in zip(attractions, shadows):
        if v < w:
            raise ShadowExceedsAttraction(f"attraction {v} below shadow attraction {w}")
    denom = v0 + math.fsum(attractions) + shadow_outside
    if denom == 0.0:
        return 1.0, [0.0] * len(attractions)
    return (v0 + shadow_outside) / denom, [v / denom for v in attractions]


def gam_phi(
    v0: float, shadow: Sequence[float], attractions: Mapping[int, float], i: int | None
) -> float:
    """φ(i, S) = v_i / (v0 + v(S) + w(N \\ S)).

    ``shadow`` covers every item of N, ``attractions`` maps the ids in S to
    their realized attraction, and ``i`` is an item id (or ``None``).
    """
    members = sorted(attractions)
    offered = set(members)
    w_out = math.fsum(w for j, w in enumerate(shadow) if j not in offered)
    outside, shares = gam_shares(
        v0, w_out, [attractions[j] for j in members], [shadow[j] for j in members]
    )
    if i is None:
        return outside
    return shares[members.index(i)]


# ---------------------------------------------------------------------------
# Independent RUM with deterministic outside utility
# ---------------------------------------------------------------------------


def _cdf_below(dist: UtilityDist, u: float, strict: bool) -> float:
    if strict:
        return math.fsum(p for p, x in dist if x < u)
    return math.fsum(p for p, x in dist if x <= u)


def rum_shares(u0: float, dists: Sequence[UtilityDist]) -> tuple[float, list[float]]:
    """Exact RUM shares by conditioning on each member's utility atom.

    Ties: the lower item id wins among items; the outside option loses every
    tie. With independent utilities, member ``a`` with utility ``u`` wins iff
    ``u >= u0``, every earlier member is strictly below ``u`` and every later
    member is at most ``u``.
    """
    shares = []
    for a, dist in enumerate(dists):
        total = []
        for p, u in dist:
            if u < u0:
                continue
            prob = p
            for b, other in enumerate(dists):
                if b != a:
                    prob *= _cdf_below(other, u, strict=b < a)
            total.append(prob)
        shares.append(math.fsum(total))
    outside = 1.0
    for dist in dists:
        outside *= _cdf_below(dist, u0, strict=True)
    return outside, shares


def rum_shares_enumerate(
    u0: float, dists: Sequence[UtilityDist], atom_limit: int = DEFAULT_RUM_ATOM_LIMIT
) -> tuple[float, list[float]]:
    """RUM shares by brute-force enumeration of the joint utility support."""
    size = math.prod(len(d) for d in dists)
    if size > atom_limit:
        raise SupportTooLarge(f"joint utility support {size} exceeds limit {atom_limit}")
    outside = []
    shares: list[list[float]] = [[] for _ in dists]
    for combo in itertools.product(*dists):
        prob = math.prod(p for p, _ in combo)
        winner, best = None, u0
        for a, (_, u) in enumerate(combo):
            # outside loses ties, so >= against it; earlier ids keep ties
            if (winner is None and u >= best) or (winner is not None and u > best):
                winner, best = a, u
        if winner is None:
            outside.append(prob)
        else:
            shares[winner].append(prob)
    return math.fsum(outside), [math.fsum(s) for s in shares]


def rum_phi(u0: float, dists: Sequence[UtilityDist], i: int | None) -> float:
    outside, shares = rum_shares(u0, dists)
    return _pick(outside, shares, i)


# ---------------------------------------------------------------------------
# Lowest considered fare
# ---------------------------------------------------------------------------


def lcf_shares(fares: Sequence[float], qs: Sequence[float]) -> tuple[float, list[float]]:
    """LCF shares; equal fares are ordered by position (item id)."""
    shares = [0.0] * len(fares)
    survive = 1.0
    for a in sorted(range(len(fares)), key=lambda a: (fares[a], a)):
        shares[a] = qs[a] * survive
        survive *= 1.0 - qs[a]
    return survive, shares


def lcf_phi(fares: Sequence[float], qs: Sequence[float], i: int | None) -> float:
    """φ(i, S) = q_i · Π_{j cheaper than i} (1 − q_j)."""
    outside, shares = lcf_shares(fares, qs)
    return _pick(outside, shares, i)
