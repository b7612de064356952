"""Increment distributions in one and several dimensions.

A :class:`Measure1D` is either *lattice* (atoms on the integers, optionally
extended by an analytic tail for infinite-support families) or *continuous*
(a seeded sampler together with the tail function ``x -> mass((x, inf))``).
A :class:`JointMeasure` is a law on ``R^(r+s)`` given either by finite
support or as a product of one-dimensional factors.

Lattice laws used to drive reflected walks are normalized so that their
support has greatest common divisor 1 (see :func:`gcd_normalize`); heavier
machinery (moments with divergence detection, heavy-tailed samplers) lives
on the measure objects so every consumer sees one consistent law.

Probabilities are binary64 throughout; "exact" means within the stated
tolerances (1e-12 for finite atom tables, 1e-9 for prefix-plus-analytic-tail
families).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .rng import make_rng

ATOM_SUM_TOL = 1e-12
TAILED_SUM_TOL = 1e-9

# Dyadic-block divergence test: a fractional-moment series is declared
# divergent when this many consecutive block ratios fail to drop below
# the decay threshold.
DIVERGENCE_BLOCKS = 20
DIVERGENCE_DECAY = 0.95
_ENUM_MAX = 1 << 21  # blocks below this bound are summed term by term
_MAX_BLOCK_EXP = 64


class MeasureError(ValueError):
    """Raised for malformed measures or operations they do not support."""


# ---------------------------------------------------------------------------
# one-dimensional measures
# ---------------------------------------------------------------------------

class Measure1D:
    """A one-dimensional increment law.

    Construct via :meth:`lattice`, :meth:`lattice_tailed`, :meth:`continuous`
    or :meth:`lattice_sampler`.  Instances are immutable after construction
    and safe to share across threads; all sampling goes through an explicit
    generator owned by the caller.
    """

    def __init__(self, kind, support=None, probs=None, tail_fn=None,
                 pmf_fn=None, tail_sampler=None, sampler=None, density=None,
                 bounds=None, normalized=False, symmetric=None, name=None,
                 meta=None):
        self.kind = kind                    # "lattice" | "continuous"
        self.support = support              # sorted int64 array (lattice)
        self.probs = probs                  # float64 array matching support
        self._tail_fn = tail_fn             # analytic x -> mass((x, inf))
        self._pmf_fn = pmf_fn               # analytic pmf beyond the table
        self._tail_sampler = tail_sampler   # conditional sampler beyond table
        self._sampler = sampler             # full sampler (continuous/backed)
        self.density = density
        self.bounds = bounds                # (lo, hi) hints, may be +-inf
        self.normalized = normalized
        self._symmetric = symmetric
        self.name = name
        self.meta = dict(meta or {})
        if kind == "lattice" and support is not None:
            self._cdf = np.cumsum(probs)
            # mass strictly above support[i], excluding the analytic tail
            self._suffix = np.concatenate([np.cumsum(probs[::-1])[::-1][1:], [0.0]])
        else:
            self._cdf = None
            self._suffix = None
        self._validate()

    # -- constructors -------------------------------------------------------

    @classmethod
    def lattice(cls, atoms, name=None, symmetric=None) -> "Measure1D":
        """Finite lattice law from ``{point: prob}`` or ``[(point, prob)]``."""
        if isinstance(atoms, dict):
            items = sorted(atoms.items())
        else:
            items = sorted((int(x), float(p)) for x, p in atoms)
        if not items:
            raise MeasureError("empty support")
        merged: dict[int, float] = {}
        for x, p in items:
            if x != int(x):
                raise MeasureError(f"non-integer lattice atom {x!r}")
            merged[int(x)] = merged.get(int(x), 0.0) + float(p)
        support = np.array(sorted(merged), dtype=np.int64)
        probs = np.array([merged[x] for x in sorted(merged)], dtype=float)
        keep = probs > 0.0
        if not keep.any():
            raise MeasureError("all atom probabilities are zero")
        support, probs = support[keep], probs[keep]
        g = 0
        for x in support:
            g = math.gcd(g, abs(int(x)))
        return cls("lattice", support=support, probs=probs,
                   normalized=(g == 1), symmetric=symmetric, name=name)

    @classmethod
    def lattice_arrays(cls, support, probs, name=None, symmetric=None) -> "Measure1D":
        """Finite lattice law from parallel arrays (fast path for big supports)."""
        support = np.asarray(support, dtype=np.int64)
        probs = np.asarray(probs, dtype=float)
        order = np.argsort(support)
        support, probs = support[order], probs[order]
        if len(np.unique(support)) != len(support):
            raise MeasureError("duplicate support points")
        keep = probs > 0.0
        support, probs = support[keep], probs[keep]
        if len(support) == 0:
            raise MeasureError("empty support")
        g = int(np.gcd.reduce(np.abs(support))) if len(support) else 0
        return cls("lattice", support=support, probs=probs,
                   normalized=(g == 1), symmetric=symmetric, name=name)

    @classmethod
    def lattice_tailed(cls, support, probs, tail_fn, pmf_fn=None,
                       tail_sampler=None, name=None, meta=None) -> "Measure1D":
        """Infinite-support lattice family: exact prefix atoms plus analytic tail.

        ``support`` must be contiguous integers; ``tail_fn(x)`` must return the
        mass strictly above ``x`` for every ``x >= support[-1]`` and agree with
        the implicit prefix mass: ``probs.sum() + tail_fn(support[-1]) == 1``
        within 1e-9.
        """
        support = np.asarray(support, dtype=np.int64)
        probs = np.asarray(probs, dtype=float)
        return cls("lattice", support=support, probs=probs, tail_fn=tail_fn,
                   pmf_fn=pmf_fn, tail_sampler=tail_sampler, normalized=True,
                   name=name, meta=meta)

    @classmethod
    def continuous(cls, sampler, tail, density=None, bounds=None,
                   symmetric=None, name=None, meta=None) -> "Measure1D":
        """Continuous law given by a seeded sampler and its tail function."""
        return cls("continuous", sampler=sampler, tail_fn=tail, density=density,
                   bounds=bounds, symmetric=symmetric, name=name, meta=meta)

    @classmethod
    def lattice_sampler(cls, sampler, symmetric=None, mean=None,
                        name=None, meta=None) -> "Measure1D":
        """Integer-valued law available only through its sampler.

        Used for laws without a tractable atom table (e.g. subordinated walk
        increments).  Tail and moment queries raise; symmetry and mean are
        declared by the constructor.
        """
        meta = dict(meta or {})
        if mean is not None:
            meta["declared_mean"] = float(mean)
        return cls("lattice", sampler=sampler, normalized=True,
                   symmetric=symmetric, name=name, meta=meta)

    # -- validation ---------------------------------------------------------

    def _validate(self):
        if self.kind not in ("lattice", "continuous"):
            raise MeasureError(f"unknown kind {self.kind!r}")
        if self.kind == "lattice" and self.support is not None:
            if len(self.support) == 0:
                raise MeasureError("empty support")
            if np.any(self.probs < 0):
                raise MeasureError("negative atom probability")
            total = float(self.probs.sum())
            if self._tail_fn is None:
                if abs(total - 1.0) > ATOM_SUM_TOL:
                    raise MeasureError(f"atom probabilities sum to {total}, not 1")
            else:
                tail_mass = float(self._tail_fn(int(self.support[-1])))
                if abs(total + tail_mass - 1.0) > TAILED_SUM_TOL:
                    raise MeasureError(
                        f"prefix mass {total} + analytic tail {tail_mass} != 1")
        if self.kind == "continuous" and (self._sampler is None or self._tail_fn is None):
            raise MeasureError("continuous measure needs sampler and tail")

    # -- basic queries ------------------------------------------------------

    @property
    def is_lattice(self) -> bool:
        return self.kind == "lattice"

    @property
    def has_atoms(self) -> bool:
        return self.support is not None

    @property
    def has_analytic_tail(self) -> bool:
        return self.is_lattice and self._tail_fn is not None

    def atoms_dict(self) -> dict[int, float]:
        if not self.has_atoms:
            raise MeasureError("measure has no atom table")
        return {int(x): float(p) for x, p in zip(self.support, self.probs)}

    def min_support(self) -> float:
        if self.has_atoms:
            return float(self.support[0])
        if self.bounds is not None:
            return float(self.bounds[0])
        return -math.inf

    def max_support(self) -> float:
        if self.has_atoms and not self.has_analytic_tail:
            return float(self.support[-1])
        if self.kind == "continuous" and self.bounds is not None:
            return float(self.bounds[1])
        return math.inf

    def prob(self, x) -> float:
        """Atom mass at integer ``x`` (lattice only)."""
        if not self.has_atoms:
            raise MeasureError("atom lookup needs an atom table")
        i = np.searchsorted(self.support, int(x))
        if i < len(self.support) and self.support[i] == int(x):
            return float(self.probs[i])
        if self.has_analytic_tail and x > self.support[-1] and self._pmf_fn is not None:
            return float(self._pmf_fn(np.array([x]))[0])
        return 0.0

    def tail(self, x) -> float:
        """Mass strictly above ``x``."""
        if self.kind == "continuous":
            return float(self._tail_fn(x))
        if not self.has_atoms:
            raise MeasureError(f"{self.name or 'sampler-backed measure'} has no tail function")
        if self.has_analytic_tail and x >= self.support[-1]:
            return float(self._tail_fn(x))
        i = np.searchsorted(self.support, x, side="right")
        base = float(self._suffix[i - 1]) if i >= 1 else float(self.probs.sum())
        extra = float(self._tail_fn(int(self.support[-1]))) if self.has_analytic_tail else 0.0
        return base + extra

    def tail_many(self, xs) -> np.ndarray:
        """Vectorized :meth:`tail` over an array of query points."""
        xs = np.asarray(xs)
        if self.kind == "continuous":
            return np.array([float(self._tail_fn(x)) for x in xs.ravel()]
                            ).reshape(xs.shape)
        if not self.has_atoms:
            raise MeasureError("sampler-backed law has no tail function")
        extra = float(self._tail_fn(int(self.support[-1]))) if self.has_analytic_tail else 0.0
        idx = np.searchsorted(self.support, xs, side="right")
        base = np.where(idx >= 1,
                        self._suffix[np.maximum(idx - 1, 0)],
                        float(self.probs.sum()))
        out = base + extra
        if self.has_analytic_tail:
            beyond = xs >= self.support[-1]
            if np.any(beyond):
                out = np.asarray(out, dtype=float)
                out[beyond] = self._tail_fn(np.asarray(xs)[beyond])
        return out

    def is_symmetric(self) -> bool:
        """Invariance under ``y -> -y`` (exact for atom tables, declared otherwise)."""
        if self._symmetric is not None:
            return bool(self._symmetric)
        if self.has_atoms and not self.has_analytic_tail:
            d = self.atoms_dict()
            return all(abs(p - d.get(-x, 0.0)) <= ATOM_SUM_TOL for x, p in d.items())
        return False

    def is_nontrivial_positive(self) -> bool:
        """Whether the law puts positive mass on ``(0, inf)``."""
        if self.has_atoms:
            mass = float(self.probs[self.support > 0].sum())
            if self.has_analytic_tail:
                mass += float(self._tail_fn(int(self.support[-1])))
            return mass > 0.0
        if self.kind == "continuous":
            return self.tail(0.0) > 0.0
        # sampler-backed integer laws in this package are symmetric around 0
        return True

    # -- sampling -----------------------------------------------------------

    def sample(self, rng, size=None):
        """Draw from the law using ``rng`` (a ``numpy.random.Generator``)."""
        rng = make_rng(rng)
        if self._sampler is not None:
            return self._sampler(rng, size)
        n = 1 if size is None else int(np.prod(size))
        u = rng.random(n)
        out = np.empty(n, dtype=np.int64)
        if self.has_analytic_tail:
            cut = float(self._cdf[-1])
            in_table = u < cut
            idx = np.searchsorted(self._cdf, u[in_table], side="right")
            out[in_table] = self.support[idx]
            n_tail = int((~in_table).sum())
            if n_tail:
                if self._tail_sampler is None:
                    raise MeasureError("analytic-tail family lacks a tail sampler")
                out[~in_table] = self._tail_sampler(rng, n_tail)
        else:
            idx = np.searchsorted(self._cdf, u * self._cdf[-1], side="right")
            idx = np.minimum(idx, len(self.support) - 1)
            out = self.support[idx]
        if size is None:
            return int(out[0])
        return out.reshape(size)

    # -- moments ------------------------------------------------------------

    def mean(self) -> float:
        """Signed first moment; honours a declared mean for sampler-backed laws."""
        if "declared_mean" in self.meta:
            return float(self.meta["declared_mean"])
        pos = self.moment(1.0, "positive")
        neg = self.moment(1.0, "negative")
        if math.isinf(pos) and math.isinf(neg):
            raise MeasureError("mean undefined: both tails have infinite mass")
        return pos - neg

    def moment(self, p: float, part: str = "full") -> float:
        """``E|Y|^p``, ``E (Y^+)^p`` or ``E (Y^-)^p``; ``inf`` when divergent.

        Divergence on infinite-support families is decided by the dyadic-block
        test: the series is declared divergent when the block sums over
        ``[2^m, 2^(m+1))`` fail to decay geometrically (ratio above
        ``DIVERGENCE_DECAY``) for ``DIVERGENCE_BLOCKS`` consecutive blocks.
        """
        if p < 0:
            raise MeasureError("moment order must be nonnegative")
        if part not in ("full", "positive", "negative"):
            raise MeasureError(f"unknown moment part {part!r}")
        if self.kind == "continuous":
            return self._moment_continuous(p, part)
        if not self.has_atoms:
            raise MeasureError("moment of a sampler-backed law is not available")
        xs = self.support.astype(float)
        if part == "positive":
            vals = np.where(xs > 0, xs, 0.0)
        elif part == "negative":
            vals = np.where(xs < 0, -xs, 0.0)
        else:
            vals = np.abs(xs)
        finite_part = float(np.dot(vals ** p, self.probs))
        if not self.has_analytic_tail:
            return finite_part
        if part == "negative":
            return finite_part
        return finite_part + self._tail_block_series(p)

    def _tail_block_series(self, p: float) -> float:
        """Sum (or detect divergence of) ``sum x^p pmf(x)`` beyond the table."""
        if self._pmf_fn is None:
            raise MeasureError("analytic-tail family lacks a pmf function")
        start = int(self.support[-1]) + 1
        blocks = []
        lo = start
        m = max(1, int(math.ceil(math.log2(max(lo, 1)))))
        fail_run = 0
        prev = None
        total = 0.0
        while m <= _MAX_BLOCK_EXP:
            hi = 1 << m
            if hi <= lo:
                m += 1
                continue
            blocks.append(self._block_sum(p, lo, hi))
            b = blocks[-1]
            if prev is not None and prev > 0:
                ratio = b / prev
                fail_run = fail_run + 1 if ratio > DIVERGENCE_DECAY else 0
                if fail_run >= DIVERGENCE_BLOCKS:
                    return math.inf
            total += b
            if b > 0 and b < 1e-16 * max(total, 1e-300):
                break
            prev = b
            lo = hi
            m += 1
        return total

    def _block_sum(self, p: float, lo: int, hi: int) -> float:
        """``sum_{x=lo}^{hi-1} x^p pmf(x)`` term by term or via quadrature."""
        if hi - lo <= _ENUM_MAX:
            xs = np.arange(lo, hi, dtype=float)
            return float(np.dot(xs ** p, self._pmf_fn(xs)))
        val, _ = integrate.quad(lambda t: t ** p * float(self._pmf_fn(np.array([t]))[0]),
                                lo, hi, limit=200)
        return float(val)

    def _moment_continuous(self, p: float, part: str) -> float:
        lo = self.min_support()
        hi = self.max_support()
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise MeasureError("continuous moments need finite support bounds")
        if self.density is not None:
            def g(x):
                if part == "positive":
                    v = max(x, 0.0)
                elif part == "negative":
                    v = max(-x, 0.0)
                else:
                    v = abs(x)
                return v ** p * self.density(x)
            val, _ = integrate.quad(g, lo, hi, limit=200)
            return float(val)
        # fall back to the tail representation E (Y^+)^p = int p x^(p-1) tail(x) dx
        if part == "negative":
            val, _ = integrate.quad(
                lambda x: p * x ** (p - 1) * max(0.0, 1.0 - self.tail(-x)), 0.0,
                max(-lo, 0.0) or 1.0, limit=200)
            return float(val)
        val, _ = integrate.quad(lambda x: p * x ** (p - 1) * self.tail(x),
                                0.0, max(hi, 0.0) or 1.0, limit=200)
        if part == "full" and lo < 0:
            low, _ = integrate.quad(
                lambda x: p * x ** (p - 1) * max(0.0, 1.0 - self.tail(-x)), 0.0,
                -lo, limit=200)
            val += low
        return float(val)

    def __repr__(self):
        if self.name:
            return f"Measure1D({self.name})"
        if self.has_atoms and len(self.support) <= 6 and not self.has_analytic_tail:
            return "Measure1D({%s})" % ", ".join(
                f"{int(x)}: {p:g}" for x, p in zip(self.support, self.probs))
        return f"Measure1D(kind={self.kind})"


# ---------------------------------------------------------------------------
# spec operations on one-dimensional measures
# ---------------------------------------------------------------------------

def gcd_normalize(m: Measure1D) -> tuple[Measure1D, int]:
    """Divide a lattice law's support by its gcd.

    Returns the normalized measure (flagged ``normalized``) together with the
    factor that was divided out.  Rejects empty or ``{0}`` supports.
    """
    if not m.is_lattice or not m.has_atoms:
        raise MeasureError("gcd_normalize needs a lattice law with an atom table")
    if m.has_analytic_tail:
        return m, 1  # tailed families are built normalized
    g = 0
    for x in m.support:
        g = math.gcd(g, abs(int(x)))
    if g == 0:
        raise MeasureError("degenerate support {0}")
    if g == 1:
        if m.normalized:
            return m, 1
        out = Measure1D.lattice(m.atoms_dict(), name=m.name)
        return out, 1
    atoms = {int(x) // g: float(p) for x, p in zip(m.support, m.probs)}
    return Measure1D.lattice(atoms, name=m.name), g


def tail(m: Measure1D, x) -> float:
    """Mass strictly above ``x``."""
    return m.tail(x)


def moment(m: Measure1D, p: float, part: str = "full") -> float:
    """See :meth:`Measure1D.moment`."""
    return m.moment(p, part)


# ---------------------------------------------------------------------------
# subordinator increments tau_alpha and the subordinated walk law
# ---------------------------------------------------------------------------

def subordinator_pmf(alpha: float, k) -> float | np.ndarray:
    """Probability that a tau_alpha increment equals ``k`` (``k >= 1``).

    The mass is ``alpha * Gamma(k - alpha) / (k! * Gamma(1 - alpha))``,
    evaluated through log-gamma; it behaves like
    ``alpha / (Gamma(1 - alpha) * k^(1 + alpha))`` for large ``k``.
    """
    if not 0.0 < alpha < 1.0:
        raise MeasureError("alpha must lie in (0, 1)")
    karr = np.asarray(k, dtype=float)
    if np.any(karr < 1):
        raise MeasureError("k must be >= 1")
    out = alpha * np.exp(gammaln(karr - alpha) - gammaln(karr + 1.0)
                         - gammaln(1.0 - alpha))
    if np.isscalar(k):
        return float(out)
    return out


def subordinator_tail(alpha: float, k) -> float | np.ndarray:
    """``P[T > k]`` for the tau_alpha increment, exactly.

    Telescoping the pmf gives the closed form
    ``Gamma(k + 1 - alpha) / (k! * Gamma(1 - alpha))``.
    """
    karr = np.asarray(k, dtype=float)
    out = np.exp(gammaln(karr + 1.0 - alpha) - gammaln(karr + 1.0)
                 - gammaln(1.0 - alpha))
    if np.isscalar(k):
        return float(out)
    return out


@dataclass
class SubordinatorAlpha:
    """The heavy-tailed renewal-time law driving subordinated walks.

    ``pmf(k) = alpha Gamma(k - alpha) / (k! Gamma(1 - alpha))`` for ``k >= 1``.
    Sampling inverts the exact cdf on a prefix table and falls back to exact
    tail inversion (asymptotic seed refined by the ratio recurrence
    ``tail(k+1)/tail(k) = (k + 1 - alpha)/(k + 1)``) beyond it.  Draws are
    capped at ``cap`` to keep downstream integer arithmetic exact; the capped
    mass is tiny and callers can count clipped draws.
    """

    alpha: float
    table_size: int = 1 << 16
    cap: int = 1 << 55

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise MeasureError("alpha must lie in (0, 1)")
        ks = np.arange(0, self.table_size + 1, dtype=float)
        self._tail_table = np.exp(gammaln(ks + 1.0 - self.alpha) - gammaln(ks + 1.0)
                                  - gammaln(1.0 - self.alpha))  # P[T > k]
        self._tail_ascending = self._tail_table[::-1].copy()
        self._g1ma = math.gamma(1.0 - self.alpha)

    def pmf(self, k):
        return subordinator_pmf(self.alpha, k)

    def tail(self, k):
        return subordinator_tail(self.alpha, k)

    def sample(self, rng, size, cap=None) -> np.ndarray:
        """Exact inversion sampling of tau_alpha increments."""
        rng = make_rng(rng)
        cap = self.cap if cap is None else int(cap)
        n = int(size)
        v = 1.0 - rng.random(n)  # in (0, 1]; T = min{k >= 1 : tail(k) <= v}
        out = np.empty(n, dtype=np.int64)
        qK = self._tail_table[-1]
        small = v >= qK
        if small.any():
            # tail table is decreasing; count entries above v
            pos = np.searchsorted(self._tail_ascending, v[small], side="right")
            out[small] = self.table_size + 1 - pos  # first k with tail(k) <= v
        nbig = int((~small).sum())
        if nbig:
            out[~small] = self._invert_tail(v[~small])
        np.minimum(out, cap, out=out)
        np.maximum(out, 1, out=out)
        return out

    def _invert_tail(self, v: np.ndarray) -> np.ndarray:
        """Smallest ``k`` with ``tail(k) <= v`` for ``v`` below the table floor.

        Seeds from the first-order tail asymptotics, then corrects with the
        exact one-step ratios ``tail(k)/tail(k-1) = (k - alpha)/k``.
        """
        a = self.alpha
        k = (v * self._g1ma) ** (-1.0 / a)
        k = k * np.exp(-(1.0 - a) / (2.0 * np.maximum(k, 4.0)))  # first-order bias fix
        k = np.maximum(np.floor(k), self.table_size + 1).astype(np.float64)
        logv = np.log(v)
        logq = (gammaln(k + 1.0 - a) - gammaln(k + 1.0) - math.lgamma(1.0 - a))
        idx = np.arange(len(v))
        for _ in range(512):
            # down while tail(k-1) <= v and k above the table, up while tail(k) > v
            down = (logq - np.log1p(-a / k) <= logv) & (k > self.table_size + 1)
            up = logq > logv
            act = down | up
            if not act.any():
                break
            sel = np.nonzero(act)[0]
            ks, lq = k[sel], logq[sel]
            d = down[sel]
            lq = np.where(d, lq - np.log1p(-a / ks), lq)
            ks = np.where(d, ks - 1.0, ks)
            u = up[sel]
            lq = np.where(u, lq + np.log1p(-a / (ks + 1.0)), lq)
            ks = np.where(u, ks + 1.0, ks)
            k[sel], logq[sel] = ks, lq
        return np.minimum(k, 2.0 ** 62).astype(np.int64)

    def conditional_tail_sample(self, rng, size, threshold: int) -> np.ndarray:
        """Draw ``T`` conditioned on ``T > threshold`` (exact inversion)."""
        rng = make_rng(rng)
        qt = float(self.tail(threshold))
        v = rng.random(int(size)) * qt
        v = np.maximum(v, 1e-300)
        out = np.empty(int(size), dtype=np.int64)
        if threshold < self.table_size:
            qK = self._tail_table[-1]
            small = v >= qK
            if small.any():
                pos = np.searchsorted(self._tail_ascending, v[small], side="right")
                out[small] = self.table_size + 1 - pos
            if (~small).any():
                out[~small] = self._invert_tail(v[~small])
        else:
            out = self._invert_tail(v)
        return np.maximum(out, threshold + 1)


def subordinated_increment_sampler(alpha: float, rng, size=None,
                                   subordinator: Optional[SubordinatorAlpha] = None,
                                   cap: int = 1 << 62):
    """One increment of the subordinated +-1 walk.

    Draws ``T`` from the tau_alpha law and returns the sum of ``T``
    independent fair +-1 steps (realised exactly as ``2 Binomial(T, 1/2) - T``,
    which has the same distribution).  The output parity equals the parity
    of ``T``.

    ``cap`` truncates ``T`` to keep integer arithmetic exact; at the default
    ``2^62`` the clipped mass is below ``2^(-18 alpha)`` per draw and the
    increment magnitude stays around ``sqrt(T) ~ 2^31``, far beyond any
    reachable walk scale.  Do not lower the cap into the reachable range:
    truncating the time law gives the increments finite variance and turns a
    genuinely transient heavy-tailed walk into a diffusive recurrent one.
    """
    rng = make_rng(rng)
    sub = subordinator or SubordinatorAlpha(alpha)
    scalar = size is None
    n = 1 if scalar else int(np.prod(size))
    t = sub.sample(rng, n, cap=cap)
    steps_up = rng.binomial(t, 0.5)
    out = 2 * steps_up - t
    if scalar:
        return int(out[0])
    return out.reshape(size)


# ---------------------------------------------------------------------------
# builtin families
# ---------------------------------------------------------------------------

def wiener_hopf_log_tail(cutoff: int = 1_000_000) -> Measure1D:
    """The nonincreasing ladder-height law ``c log(x+2) / (x+2)^(3/2)`` on N_0.

    The normalizing constant has no closed form; it is computed numerically
    from the prefix sum plus the analytic tail integral and recorded in the
    measure metadata.  The measure keeps exact atoms up to ``cutoff`` and an
    analytic (midpoint-rule) tail beyond.
    """
    cutoff = int(cutoff)
    xs = np.arange(cutoff, dtype=float)

    def raw(x):
        return np.log(x + 2.0) / (x + 2.0) ** 1.5

    def raw_tail_integral(x):
        # integral_{x + 1/2}^{inf} log(t+2) (t+2)^(-3/2) dt, closed form
        u = np.asarray(x, dtype=float) + 2.5
        return 2.0 * (np.log(u) + 2.0) / np.sqrt(u)

    prefix = raw(xs)
    c = 1.0 / (prefix.sum() + float(raw_tail_integral(cutoff - 1)))
    probs = c * prefix

    def tail_fn(x):
        return c * raw_tail_integral(x)

    def pmf_fn(x):
        return c * raw(np.asarray(x, dtype=float))

    def tail_sampler(rng, n):
        # invert v = tail(x): Newton in log-space on the closed-form tail
        v = rng.random(n) * tail_fn(cutoff - 1)
        v = np.maximum(v, 1e-300)
        w = np.log(np.maximum((2.0 * c / v) ** 2, cutoff + 2.0))  # w = log(u)
        for _ in range(60):
            f = math.log(2.0 * c) + np.log(w + 2.0) - 0.5 * w - np.log(v)
            df = 1.0 / (w + 2.0) - 0.5
            step = f / df
            w = w - np.clip(step, -30.0, 30.0)
        u = np.exp(w)
        return np.maximum(np.round(u - 2.5).astype(np.int64) + 1, cutoff)

    return Measure1D.lattice_tailed(
        np.arange(cutoff, dtype=np.int64), probs, tail_fn, pmf_fn=pmf_fn,
        tail_sampler=tail_sampler, name=f"wiener_hopf_log_tail(K={cutoff})",
        meta={"normalizing_constant": c, "cutoff": cutoff})


def subordinated(alpha: float, cap: int = 1 << 62,
                 table_size: int = 1 << 16) -> Measure1D:
    """Law of one subordinated-walk increment (symmetric, heavy-tailed).

    Sampler-backed: atoms are not tabulated.  Symmetric by construction and
    centred whenever the first absolute moment is finite (``alpha > 1/2``).
    """
    sub = SubordinatorAlpha(alpha, table_size=table_size, cap=cap)

    def sampler(rng, size):
        return subordinated_increment_sampler(alpha, rng, size,
                                              subordinator=sub, cap=cap)

    return Measure1D.lattice_sampler(
        sampler, symmetric=True, mean=0.0, name=f"subordinated(alpha={alpha})",
        meta={"alpha": alpha, "cap": cap, "subordinator": sub})


def uniform(a: float = 0.0, b: float = 1.0) -> Measure1D:
    """Uniform law on ``[a, b]``."""
    a, b = float(a), float(b)
    if not b > a:
        raise MeasureError("uniform needs b > a")

    def sampler(rng, size):
        return rng.uniform(a, b, size=size)

    def tail_fn(x):
        return float(np.clip((b - x) / (b - a), 0.0, 1.0))

    def density(x):
        return 1.0 / (b - a) if a <= x <= b else 0.0

    return Measure1D.continuous(sampler, tail_fn, density=density, bounds=(a, b),
                                symmetric=(abs(a + b) < 1e-15),
                                name=f"uniform({a},{b})")


BUILTIN_FAMILIES = {
    "wiener_hopf_log_tail": wiener_hopf_log_tail,
    "subordinated": subordinated,
    "uniform": uniform,
}


def measure_from_config(cfg) -> Measure1D:
    """Build a one-dimensional measure from a config mapping.

    Accepted forms::

        {"atoms": [[1, 0.5], [2, 0.5]]}
        {"family": "wiener_hopf_log_tail", "cutoff": 1000000}
        {"family": "subordinated", "alpha": 0.5}
        {"family": "uniform", "a": 0.0, "b": 1.0}
    """
    if isinstance(cfg, Measure1D):
        return cfg
    if not isinstance(cfg, dict):
        raise MeasureError(f"measure config must be a mapping, got {type(cfg).__name__}")
    if "atoms" in cfg:
        return Measure1D.lattice([(int(x), float(p)) for x, p in cfg["atoms"]])
    if "family" in cfg:
        name = cfg["family"]
        if name not in BUILTIN_FAMILIES:
            raise MeasureError(f"unknown builtin family {name!r}")
        kwargs = {k: v for k, v in cfg.items() if k != "family"}
        return BUILTIN_FAMILIES[name](**kwargs)
    raise MeasureError("measure config needs 'atoms' or 'family'")


# ---------------------------------------------------------------------------
# joint measures
# ---------------------------------------------------------------------------

@dataclass
class JointMeasure:
    """An ``(r+s)``-dimensional increment law.

    ``dims = (r1, r2, s1, s2)``: the first ``r1`` coordinates are reflected
    lattice, the next ``r2`` reflected continuous, then ``s1`` free lattice
    and ``s2`` free continuous.  The body is either finite support
    (``points`` with ``probs``) or a product of one-dimensional factors.
    """

    dims: tuple[int, int, int, int]
    points: Optional[np.ndarray] = None
    probs: Optional[np.ndarray] = None
    factors: Optional[list] = None
    _cdf: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def finite(cls, dims, atoms) -> "JointMeasure":
        """Finite-support joint law from ``[(point, prob)]`` pairs."""
        pts = np.array([np.atleast_1d(np.asarray(p, dtype=float)) for p, _ in atoms])
        probs = np.array([float(w) for _, w in atoms])
        return cls(tuple(int(d) for d in dims), points=pts, probs=probs)

    @classmethod
    def product(cls, dims, factors: Sequence[Measure1D]) -> "JointMeasure":
        return cls(tuple(int(d) for d in dims), factors=list(factors))

    def __post_init__(self):
        r1, r2, s1, s2 = self.dims
        d = r1 + r2 + s1 + s2
        if self.points is not None:
            if self.points.ndim != 2 or self.points.shape[1] != d:
                raise MeasureError(f"support points must have {d} coordinates")
            if np.any(self.probs < 0):
                raise MeasureError("negative probability")
            if abs(float(self.probs.sum()) - 1.0) > ATOM_SUM_TOL:
                raise MeasureError(f"probabilities sum to {self.probs.sum()}, not 1")
            for i in self.lattice_coords():
                col = self.points[:, i]
                if np.any(col != np.round(col)):
                    raise MeasureError(f"coordinate {i} declared lattice but has "
                                       f"non-integer support values")
            self._cdf = np.cumsum(self.probs)
        elif self.factors is not None:
            if len(self.factors) != d:
                raise MeasureError(f"need {d} factors, got {len(self.factors)}")
            for i in self.lattice_coords():
                if not self.factors[i].is_lattice:
                    raise MeasureError(f"coordinate {i} declared lattice but factor "
                                       f"is {self.factors[i].kind}")
        else:
            raise MeasureError("joint measure needs finite support or factors")
        for i in range(r1 + r2):
            if not self.marginal(i).is_nontrivial_positive():
                raise MeasureError(
                    f"reflecting coordinate {i} has no mass on (0, inf)")

    # -- structure ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return sum(self.dims)

    @property
    def n_reflected(self) -> int:
        return self.dims[0] + self.dims[1]

    @property
    def n_free(self) -> int:
        return self.dims[2] + self.dims[3]

    def lattice_coords(self) -> list[int]:
        r1, r2, s1, s2 = self.dims
        return list(range(r1)) + list(range(r1 + r2, r1 + r2 + s1))

    @property
    def is_finite(self) -> bool:
        return self.points is not None

    # -- operations ---------------------------------------------------------

    def marginal(self, i: int) -> Measure1D:
        """Exact projection onto coordinate ``i`` (0-based)."""
        if not 0 <= i < self.dim:
            raise MeasureError(f"coordinate index {i} out of range for dim {self.dim}")
        if self.factors is not None:
            return self.factors[i]
        col = self.points[:, i]
        if np.any(col != np.round(col)):
            raise MeasureError("marginal with non-integer support points is not "
                               "representable as a lattice law")
        acc: dict[int, float] = {}
        for x, p in zip(col, self.probs):
            acc[int(round(x))] = acc.get(int(round(x)), 0.0) + float(p)
        return Measure1D.lattice(acc)

    def overall_marginal(self, coords: Sequence[int]) -> "JointMeasure":
        """Joint law of a subset of coordinates (finite-support bodies only)."""
        coords = list(coords)
        dims = self._dims_of(coords)
        if self.factors is not None:
            return JointMeasure.product(dims, [self.factors[i] for i in coords])
        acc: dict[tuple, float] = {}
        for pt, p in zip(self.points, self.probs):
            key = tuple(float(pt[i]) for i in coords)
            acc[key] = acc.get(key, 0.0) + float(p)
        return JointMeasure.finite(dims, [(np.array(k), v) for k, v in acc.items()])

    def _dims_of(self, coords):
        r1, r2, s1, s2 = self.dims
        blocks = [r1, r2, s1, s2]
        out = [0, 0, 0, 0]
        for i in coords:
            acc = 0
            for b, width in enumerate(blocks):
                if i < acc + width:
                    out[b] += 1
                    break
                acc += width
        return tuple(out)

    def sample(self, rng, size: int) -> np.ndarray:
        """``size`` i.i.d. increments as a ``(size, dim)`` array."""
        rng = make_rng(rng)
        n = int(size)
        if self.points is not None:
            u = rng.random(n)
            idx = np.searchsorted(self._cdf, u * self._cdf[-1], side="right")
            idx = np.minimum(idx, len(self.probs) - 1)
            return self.points[idx].copy()
        cols = [np.asarray(f.sample(rng, n), dtype=float) for f in self.factors]
        return np.column_stack(cols)

    def support_points(self) -> np.ndarray:
        """All support points (finite bodies; product bodies with finite factors)."""
        if self.points is not None:
            return self.points
        grids = []
        for f in self.factors:
            if not (f.has_atoms and not f.has_analytic_tail):
                raise MeasureError("support enumeration needs finite factors")
            grids.append(f.support.astype(float))
        mesh = np.meshgrid(*grids, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def is_fully_symmetric(self) -> bool:
        """Invariance under every coordinate sign flip ``x_i -> -x_i``.

        The single flips generate the full sign group, so checking each
        coordinate separately is an exact test.
        """
        if self.factors is not None:
            return all(f.is_symmetric() for f in self.factors)
        table = {tuple(pt): float(p) for pt, p in
                 zip(map(tuple, self.points), self.probs)}
        for i in range(self.dim):
            for pt, p in table.items():
                flipped = list(pt)
                flipped[i] = -flipped[i]
                if abs(table.get(tuple(flipped), 0.0) - p) > ATOM_SUM_TOL:
                    return False
        return True


def marginal(j: JointMeasure, i: int) -> Measure1D:
    """Projection of a joint law onto coordinate ``i`` (0-based)."""
    return j.marginal(i)


def is_fully_symmetric(j: JointMeasure) -> bool:
    return j.is_fully_symmetric()


def joint_from_config(cfg) -> JointMeasure:
    """Build a joint measure from a config mapping.

    Accepted forms::

        {"dims": [r1, r2, s1, s2], "product": [<measure cfg>, ...]}
        {"dims": [r1, r2, s1, s2], "atoms": [[[2, 3], 0.5], [[3, 2], 0.5]]}
        {"dims": [1, 0, 0, 0], "measure": {...}}   # one-dimensional shorthand
    """
    if isinstance(cfg, JointMeasure):
        return cfg
    if "dims" not in cfg:
        raise MeasureError("joint config needs 'dims'")
    dims = tuple(int(d) for d in cfg["dims"])
    if "product" in cfg:
        return JointMeasure.product(dims, [measure_from_config(c) for c in cfg["product"]])
    if "atoms" in cfg:
        return JointMeasure.finite(dims, [(np.asarray(pt, dtype=float), float(p))
                                          for pt, p in cfg["atoms"]])
    if "measure" in cfg:
        return JointMeasure.product(dims, [measure_from_config(cfg["measure"])])
    raise MeasureError("joint config needs 'product', 'atoms' or 'measure'")
