"""Distortion functions ``f`` with ``f(x) >= x``."""

from __future__ import annotations

from dataclasses import dataclass, field

from .exceptions import DistortionError
from .graph import as_exact

__all__ = ["DistortionFn", "parse_distortion"]


@dataclass(frozen=True)
class DistortionFn:
    """Distance budget ``f`` for spanner pairs.

    ``kind`` is one of ``"multiplicative"`` (``t*x``), ``"additive"``
    (``x + beta``), ``"linear"`` (``alpha*x + beta``) or ``"table"``
    (explicit values for the distances that occur).  Evaluation checks
    ``f(x) >= x``; monotonicity is not assumed.
    """

    kind: str
    alpha: object = 1
    beta: object = 0
    table: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("multiplicative", "additive", "linear", "table"):
            raise ValueError(f"unknown distortion kind {self.kind!r}")
        object.__setattr__(self, "alpha", as_exact(self.alpha))
        object.__setattr__(self, "beta", as_exact(self.beta))
        if self.alpha < 1:
            raise DistortionError(f"multiplicative stretch must be >= 1, got {self.alpha}")
        if self.beta < 0:
            raise DistortionError(f"additive stretch must be >= 0, got {self.beta}")
        if self.kind == "table":
            items = tuple(sorted((as_exact(k), as_exact(v)) for k, v in dict(self.table).items()))
            object.__setattr__(self, "table", items)

    # constructors -----------------------------------------------------

    @classmethod
    def identity(cls):
        return cls("multiplicative", 1)

    @classmethod
    def multiplicative(cls, t):
        return cls("multiplicative", t)

    @classmethod
    def additive(cls, beta):
        return cls("additive", 1, beta)

    @classmethod
    def linear(cls, alpha, beta):
        return cls("linear", alpha, beta)

    @classmethod
    def from_table(cls, mapping):
        return cls("table", table=tuple(dict(mapping).items()))

    @property
    def is_multiplicative(self):
        return self.kind == "multiplicative" or (self.kind == "linear" and self.beta == 0)

    @property
    def stretch(self):
        """Multiplicative factor; only meaningful when :attr:`is_multiplicative`."""
        return self.alpha

    def __call__(self, x):
        x = as_exact(x)
        if self.kind == "table":
            lookup = dict(self.table)
            if x not in lookup:
                raise DistortionError(f"distortion table has no entry for distance {x}")
            y = lookup[x]
        elif self.kind == "additive":
            y = x + self.beta
        else:
            y = self.alpha * x + self.beta
        if y < x:
            raise DistortionError(f"f({x}) = {y} < {x}")
        return y

    def __str__(self):
        if self.kind == "multiplicative":
            return "id" if self.alpha == 1 else f"x{self.alpha}"
        if self.kind == "additive":
            return f"+{self.beta}"
        if self.kind == "linear":
            return f"lin:{self.alpha},{self.beta}"
        return "table:" + ";".join(f"{k}={v}" for k, v in self.table)


def parse_distortion(text):
    """Parse the command-line notation for a distortion.

    ``id`` | ``x<t>`` / ``*<t>`` / bare ``<t>`` (multiplicative) |
    ``+<beta>`` (additive) | ``lin:<alpha>,<beta>`` |
    ``table:<x>=<f(x)>;...``.
    """
    s = text.strip()
    try:
        if s in ("id", "identity"):
            return DistortionFn.identity()
        if s[0] in "x*×":
            return DistortionFn.multiplicative(as_exact(s[1:]))
        if s[0] == "+":
            return DistortionFn.additive(as_exact(s[1:]))
        if s.startswith("lin:"):
            a, b = s[4:].split(",")
            return DistortionFn.linear(as_exact(a), as_exact(b))
        if s.startswith("table:"):
            pairs = [p.split("=") for p in s[6:].split(";") if p]
            return DistortionFn.from_table({as_exact(k): as_exact(v) for k, v in pairs})
        return DistortionFn.multiplicative(as_exact(s))
    except (ValueError, ZeroDivisionError, IndexError) as exc:
        raise DistortionError(f"cannot parse distortion {text!r}: {exc}") from None

