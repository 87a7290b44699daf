"""Trading environments: value distributions and the feedback they emit.

An environment is a finite-support joint distribution over (seller, buyer)
values in [0, 1]^2, sampled i.i.d. each round by inverse CDF over the atom
weights in listing order (one uniform draw per round).  After a price p is
posted the platform observes either

* two-bit feedback: the acceptance indicators (1{s <= p}, 1{p <= b}), or
* full feedback: the realized pair (s, b) itself.

Named instances:

* ``lb-mu`` / ``lb-nu``: two three-atom joints whose two-bit feedback laws
  coincide at every price although their optimal fixed prices sit on
  opposite sides of 1/2 (the pair behind the linear-regret lower bound for
  price-only feedback).
* ``gft-trap:h=...``: raw gain from trade is maximized only by prices in
  [1-h, 1], where the fair reward is at most h/2; a gft-greedy baseline
  therefore forfeits 1/4 - h/2 per round against the fair optimum.
* ``eps-family:eps=...``: seller is 0 or 1/4 with weights (1+eps)/2 and
  (1-eps)/2, buyer is 1.  The sign of eps moves the optimal price across
  9/16 while small |eps| keeps the two members statistically close;
  ``epsilon_family_expected_fgft`` is the closed-form mean reward.
* ``det:s=...,b=...``: a single deterministic pair.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .core import (
    FiniteJointDistribution,
    FiniteMarginal,
    ValuationPair,
    product_joint,
)
from .rng import SplitMix64


class FeedbackModel(enum.Enum):
    TWO_BIT = "two-bit"
    FULL = "full"

    @classmethod
    def parse(cls, text: str) -> "FeedbackModel":
        for model in cls:
            if model.value == text:
                return model
        raise ValueError(f"unknown feedback model {text!r}; use 'two-bit' or 'full'")


class TwoBitFeedback(NamedTuple):
    """Acceptance indicators (1{s <= p}, 1{p <= b}) of one round."""

    seller_accepts: int
    buyer_accepts: int


# Full feedback is the realized pair itself.
FullObservation = ValuationPair


@dataclass(frozen=True, eq=False)
class Environment:
    """A named value distribution plus cached sampling tables."""

    env_id: str
    joint: FiniteJointDistribution
    seller_marginal: FiniteMarginal | None = None
    buyer_marginal: FiniteMarginal | None = None

    def __post_init__(self):
        object.__setattr__(self, "_cum", self.joint.cumulative_weights())

    @property
    def cumulative_weights(self) -> np.ndarray:
        return self._cum

    @property
    def is_independent(self) -> bool:
        return self.seller_marginal is not None


def as_joint(env: Environment) -> FiniteJointDistribution:
    """The explicit finite joint behind an environment."""
    return env.joint


def sample_valuations(env: Environment, stream: SplitMix64) -> ValuationPair:
    """Draw one pair by inverse CDF over atom weights (one uniform draw).

    The atom is the first index whose cumulative weight strictly exceeds the
    uniform; the index clamps to the last atom when the cumulative sum
    rounds below 1.
    """
    u = stream.next_unit()
    cum = env.cumulative_weights
    j = int(np.searchsorted(cum, u, side="right"))
    if j >= cum.size:
        j = cum.size - 1
    return env.joint.atom(j)


def render_feedback(model: FeedbackModel, price: float, pair: ValuationPair):
    """What the platform observes after posting ``price`` against ``pair``."""
    if model is FeedbackModel.FULL:
        return pair
    return TwoBitFeedback(int(pair.seller <= price), int(price <= pair.buyer))


FEEDBACK_OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))


def feedback_distribution(env: Environment, price: float) -> dict:
    """Exact law of the two acceptance bits at one price.

    Returns {(v, w): probability} over the four outcomes, accumulated in
    atom listing order (so equal mixtures produce bitwise-equal tables).
    """
    table = {outcome: 0.0 for outcome in FEEDBACK_OUTCOMES}
    joint = env.joint
    for s, b, w in zip(joint.sellers, joint.buyers, joint.weights):
        key = (int(s <= price), int(price <= b))
        table[key] += w
    return table


def region_representatives(coords: Iterable[float]) -> np.ndarray:
    """Prices covering every constant piece of the feedback law.

    The bit indicators change value only at support coordinates, and only
    pointwise there, so the law is constant on each coordinate and on each
    open interval between consecutive coordinates.  Returns the coordinates
    (with 0 and 1 added) plus the midpoints of consecutive ones.
    """
    pts = np.unique(np.concatenate([np.asarray([0.0, 1.0]), np.asarray(list(coords), dtype=np.float64)]))
    mids = (pts[:-1] + pts[1:]) / 2.0
    return np.unique(np.concatenate([pts, mids]))


def feedback_region_prices(env: Environment) -> np.ndarray:
    """Representative prices for this environment's feedback regions."""
    joint = env.joint
    return region_representatives(np.concatenate([joint.sellers, joint.buyers]))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def deterministic(seller: float, buyer: float) -> Environment:
    """Point mass on one (seller, buyer) pair."""
    joint = FiniteJointDistribution([((seller, buyer), 1.0)])
    return Environment(
        env_id=f"det:s={seller:g},b={buyer:g}",
        joint=joint,
        seller_marginal=FiniteMarginal([seller], [1.0]),
        buyer_marginal=FiniteMarginal([buyer], [1.0]),
    )


def independent_finite(
    seller: FiniteMarginal, buyer: FiniteMarginal, env_id: str = "independent"
) -> Environment:
    """Independent seller/buyer marginals, materialized as a product joint."""
    return Environment(
        env_id=env_id,
        joint=product_joint(seller, buyer),
        seller_marginal=seller,
        buyer_marginal=buyer,
    )


def joint_finite(dist: FiniteJointDistribution, env_id: str = "joint") -> Environment:
    """Arbitrary finite joint (dependence allowed)."""
    return Environment(env_id=env_id, joint=dist)


def lb_mu() -> Environment:
    """First member of the indistinguishable pair; optimal price 5/16."""
    joint = FiniteJointDistribution(
        [
            ((0.0, 5.0 / 8.0), 1.0 / 3.0),
            ((3.0 / 8.0, 3.0 / 8.0), 1.0 / 3.0),
            ((5.0 / 8.0, 1.0), 1.0 / 3.0),
        ]
    )
    return Environment(env_id="lb-mu", joint=joint)


def lb_nu() -> Environment:
    """Second member of the indistinguishable pair; optimal price 11/16."""
    joint = FiniteJointDistribution(
        [
            ((0.0, 3.0 / 8.0), 1.0 / 3.0),
            ((3.0 / 8.0, 1.0), 1.0 / 3.0),
            ((5.0 / 8.0, 5.0 / 8.0), 1.0 / 3.0),
        ]
    )
    return Environment(env_id="lb-nu", joint=joint)


def gft_trap(h: float) -> Environment:
    """Seller 0 or 1-h with equal odds against a unit-value buyer.

    Every gft-maximizing price lies in [1-h, 1] and earns fair reward at
    most h/2, while price 1/2 earns 1/4.
    """
    if not (0.0 < h < 0.5):
        raise ValueError(f"h must lie in (0, 1/2), got {h!r}")
    seller = FiniteMarginal([0.0, 1.0 - h], [0.5, 0.5])
    buyer = FiniteMarginal([1.0], [1.0])
    env = independent_finite(seller, buyer, env_id=f"gft-trap:h={h:g}")
    return env


def epsilon_family(eps: float) -> Environment:
    """Two-atom seller (0 or 1/4) against a unit-value buyer.

    Seller weights are (1+eps)/2 on 0 and (1-eps)/2 on 1/4 for
    eps in [-1, 1]; atoms with zero weight are dropped at |eps| = 1.
    """
    if not (-1.0 <= eps <= 1.0):
        raise ValueError(f"eps must lie in [-1, 1], got {eps!r}")
    values, weights = [], []
    w0 = (1.0 + eps) / 2.0
    w1 = (1.0 - eps) / 2.0
    if w0 > 0.0:
        values.append(0.0)
        weights.append(w0)
    if w1 > 0.0:
        values.append(0.25)
        weights.append(w1)
    seller = FiniteMarginal(values, weights)
    buyer = FiniteMarginal([1.0], [1.0])
    return independent_finite(seller, buyer, env_id=f"eps-family:eps={eps:g}")


def epsilon_family_expected_fgft(eps: float, p: float) -> float:
    """Closed-form expected fgft of the eps family at one price.

    Piecewise in p with breakpoints 1/4, 1/2, 5/8; maximized at 1/2 with
    value (3+eps)/8 when eps > 0 and at 5/8 with value 3/8 when eps < 0
    (the whole segment [1/2, 5/8] is optimal at eps = 0).
    """
    if not (-1.0 <= eps <= 1.0):
        raise ValueError(f"eps must lie in [-1, 1], got {eps!r}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if p < 0.25:
        return (1.0 + eps) / 2.0 * p
    if p < 0.5:
        return (1.0 + eps) / 8.0 + (p - 0.25)
    if p < 0.625:
        return (1.0 + eps) / 8.0 + 0.25 + eps * (0.5 - p)
    return (1.0 + eps) / 8.0 + 0.25 - eps / 8.0 + (0.625 - p)


# ---------------------------------------------------------------------------
# id parsing / registry
# ---------------------------------------------------------------------------

ENVIRONMENT_ID_PATTERNS = (
    "lb-mu",
    "lb-nu",
    "gft-trap:h=<h in (0, 1/2)>",
    "eps-family:eps=<eps in [-1, 1]>",
    "det:s=<seller>,b=<buyer>",
)


class UnknownIdError(ValueError):
    """An environment or learner id that does not resolve."""


def _parse_params(text: str, spec_id: str) -> dict:
    params = {}
    for chunk in text.split(","):
        if "=" not in chunk:
            raise UnknownIdError(f"malformed parameter {chunk!r} in {spec_id!r}")
        key, value = chunk.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def parse_env(env_id: str) -> Environment:
    """Resolve an environment id string like 'gft-trap:h=0.1'."""
    head, _, tail = env_id.partition(":")
    try:
        if head == "lb-mu" and not tail:
            return lb_mu()
        if head == "lb-nu" and not tail:
            return lb_nu()
        if head == "gft-trap":
            params = _parse_params(tail, env_id)
            return gft_trap(float(params["h"]))
        if head == "eps-family":
            params = _parse_params(tail, env_id)
            return epsilon_family(float(params["eps"]))
        if head == "det":
            params = _parse_params(tail, env_id)
            return deterministic(float(params["s"]), float(params["b"]))
    except UnknownIdError:
        raise
    except (KeyError, ValueError) as exc:
        raise UnknownIdError(f"cannot resolve environment id {env_id!r}: {exc}") from exc
    raise UnknownIdError(f"unknown environment id {env_id!r}")


def env_from_config(obj) -> Environment:
    """Resolve an environment from a config entry.

    Accepts an id string, or an inline object:
    ``{"joint": [[s, b, w], ...], "id": "name"}`` or
    ``{"independent": {"seller": [[v, w], ...], "buyer": [[v, w], ...]}}``.
    """
    if isinstance(obj, str):
        return parse_env(obj)
    if isinstance(obj, dict):
        env_id = obj.get("id")
        if "joint" in obj:
            atoms = [((float(s), float(b)), float(w)) for s, b, w in obj["joint"]]
            return joint_finite(FiniteJointDistribution(atoms), env_id=env_id or "joint")
        if "independent" in obj:
            spec = obj["independent"]
            seller = FiniteMarginal(
                [float(v) for v, _ in spec["seller"]], [float(w) for _, w in spec["seller"]]
            )
            buyer = FiniteMarginal(
                [float(v) for v, _ in spec["buyer"]], [float(w) for _, w in spec["buyer"]]
            )
            return independent_finite(seller, buyer, env_id=env_id or "independent")
    raise UnknownIdError(f"cannot interpret environment config entry {obj!r}")
