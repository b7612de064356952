"""Shared builders for randomized measure families used across test modules."""

import numpy as np

from reflectwalk import measures as ms


def random_nonneg_lattice(rng, max_top=30):
    """Random finite lattice law on {0..max_top}, gcd-normalized."""
    top = int(rng.integers(1, max_top))
    k = int(rng.integers(1, min(top + 1, 6) + 1))
    pts = rng.choice(np.arange(0, top + 1), size=k, replace=False)
    if not (pts > 0).any():
        pts = np.append(pts, top if top > 0 else 1)
    probs = rng.dirichlet(np.ones(len(pts)))
    m = ms.Measure1D.lattice({int(x): float(p) for x, p in zip(pts, probs)})
    m, _ = ms.gcd_normalize(m)
    return m


def random_normalized_lattice(rng, lo=-10, hi=10):
    """Random finite lattice law with support in [lo, hi], gcd 1 and positive mass."""
    while True:
        k = int(rng.integers(2, 6))
        pts = rng.choice(np.arange(lo, hi + 1), size=k, replace=False)
        pts = pts[pts != 0]
        if len(pts) == 0 or not (pts > 0).any():
            continue
        probs = rng.dirichlet(np.ones(len(pts)))
        m = ms.Measure1D.lattice({int(x): float(p) for x, p in zip(pts, probs)})
        m, _ = ms.gcd_normalize(m)
        if m.normalized and (m.support > 0).any():
            return m


def power_tail_family(a: float, cutoff: int = 200_000) -> ms.Measure1D:
    """Lattice family with pmf proportional to (x+2)^(-a) on N_0 (a > 1)."""
    xs = np.arange(cutoff, dtype=float)
    raw = (xs + 2.0) ** -a

    def raw_tail(x):
        return (np.asarray(x, dtype=float) + 2.5) ** (1.0 - a) / (a - 1.0)

    c = 1.0 / (raw.sum() + float(raw_tail(cutoff - 1)))
    return ms.Measure1D.lattice_tailed(
        np.arange(cutoff, dtype=np.int64), c * raw,
        tail_fn=lambda x: c * raw_tail(x),
        pmf_fn=lambda x: c * (np.asarray(x, dtype=float) + 2.0) ** -a,
        name=f"power_tail(a={a})")


def random_symmetric_joint(rng, dim) -> ms.JointMeasure:
    """Random fully symmetric finite-support law in the given dimension."""
    if rng.random() < 0.5:
        factors = []
        for _ in range(dim):
            vals = sorted(set(int(v) for v in rng.integers(1, 5, size=2)))
            atoms = {}
            ps = rng.dirichlet(np.ones(len(vals)))
            for v, p in zip(vals, ps):
                atoms[v] = p / 2
                atoms[-v] = p / 2
            factors.append(ms.Measure1D.lattice(atoms))
        return ms.JointMeasure.product((0, 0, dim, 0), factors)
    base = []
    n_pts = int(rng.integers(1, 3))
    for _ in range(n_pts):
        base.append(tuple(int(v) for v in rng.integers(1, 4, size=dim)))
    acc = {}
    ps = rng.dirichlet(np.ones(len(base)))
    for pt, p in zip(base, ps):
        signs = np.array(np.meshgrid(*[[-1, 1]] * dim, indexing="ij")
                         ).reshape(dim, -1).T
        for s in signs:
            key = tuple(int(a * b) for a, b in zip(pt, s))
            acc[key] = acc.get(key, 0.0) + p / len(signs)
    return ms.JointMeasure.finite((0, 0, dim, 0), list(acc.items()))
