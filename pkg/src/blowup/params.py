"""The parameter cascade eps < eps' < eps'' < delta''' < delta'' < delta' < delta."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from fractions import Fraction

from .errors import InvariantError
from .regularity import as_fraction

FIELDS = ("eps", "eps1", "eps2", "d3", "d2", "d1", "delta", "c", "alpha", "alpha_batch")


@dataclass(frozen=True)
class ParameterCascade:
    """All constants steering one run, stored as exact fractions.

    Roles in the algorithm:

    * ``eps``   -- half-width of the selection degree windows
    * ``eps1``  -- fraction of same-cluster vertices allowed to fail the pairwise window
    * ``eps2``  -- exceptional-set bound audited for the host-side profile
    * ``d3``    -- Hall-condition margin audited in phase 2
    * ``d2``    -- sweep period ``T1 = floor(d2 * n)``, host-sweep cut-off, host-set floor
    * ``d1``    -- buffer fraction; pattern sweep flags ``|H| <= d1^2 * n``
    * ``delta`` -- nominal pair density
    * ``c``, ``alpha`` -- restriction size floor and per-cluster count cap
    * ``alpha_batch`` -- batch fraction for the round-based variant
    """

    eps: Fraction
    eps1: Fraction
    eps2: Fraction
    d3: Fraction
    d2: Fraction
    d1: Fraction
    delta: Fraction
    max_degree: int = 0
    c: Fraction = Fraction(1, 4)
    alpha: Fraction = Fraction(1, 50)
    alpha_batch: Fraction = Fraction(1, 20)

    def __post_init__(self):
        for name in FIELDS:
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        self.validate()

    @classmethod
    def default(cls, delta, max_degree: int = 0, **overrides) -> "ParameterCascade":
        """Desk-scale defaults.

        The structural constants follow a ratio-2 chain below
        ``d1 = min(delta/4, 1/8)``. The window constants ``eps`` and ``eps1``
        are sized for pairs of a few hundred vertices, where degrees into a
        set S fluctuate by about ``sqrt(|S|)/2``; narrower windows reject
        every candidate. They therefore sit above the rest of the chain.
        """
        delta = as_fraction(delta)
        d1 = min(delta / 4, Fraction(1, 8))
        base = dict(
            eps=delta * Fraction(2, 5),
            eps1=Fraction(1, 4),
            eps2=d1 / 8,
            d3=d1 / 4,
            d2=d1 / 2,
            d1=d1,
            delta=delta,
            max_degree=max_degree,
        )
        base.update(overrides)
        return cls(**base)

    @classmethod
    def geometric(cls, delta, ratio=8, max_degree: int = 0, **overrides) -> "ParameterCascade":
        """Each constant is the next larger one divided by ``ratio``."""
        delta = as_fraction(delta)
        ratio = as_fraction(ratio)
        vals = {}
        cur = delta
        for name in ("d1", "d2", "d3", "eps2", "eps1", "eps"):
            cur = cur / ratio
            vals[name] = cur
        vals.update(delta=delta, max_degree=max_degree)
        vals.update(overrides)
        return cls(**vals)

    def validate(self) -> None:
        chain = [self.eps2, self.d3, self.d2, self.d1, self.delta]
        if not all(0 < x for x in chain) or self.delta > 1:
            raise InvariantError("cascade-range", "constants must lie in (0, 1]")
        if any(a >= b for a, b in zip(chain, chain[1:])):
            raise InvariantError("cascade-order", "need eps'' < d''' < d'' < d' < delta")
        if not 0 < self.eps < 1 or not 0 < self.eps1 < 1:
            raise InvariantError("cascade-range", "window constants must lie in (0, 1)")
        if not 0 < self.c <= 1 or not 0 <= self.alpha <= 1:
            raise InvariantError("cascade-range", "restriction constants out of range")
        if not 0 < self.alpha_batch < 1:
            raise InvariantError("cascade-range", "batch fraction must lie in (0, 1)")
        if self.max_degree < 0:
            raise InvariantError("cascade-range", "max degree must be non-negative")

    @property
    def full_chain(self) -> bool:
        """Whether the complete strict chain eps < eps' < ... < delta holds."""
        chain = [self.eps, self.eps1, self.eps2, self.d3, self.d2, self.d1, self.delta]
        return all(a < b for a, b in zip(chain, chain[1:]))

    def with_(self, **kw) -> "ParameterCascade":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        out = {k: str(v) for k, v in asdict(self).items() if k != "max_degree"}
        out["max_degree"] = self.max_degree
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ParameterCascade":
        kw = {k: Fraction(d[k]) for k in FIELDS if k in d}
        return cls(max_degree=int(d.get("max_degree", 0)), **kw)
