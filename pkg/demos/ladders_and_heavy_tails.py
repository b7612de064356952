# Ladder decompositions and a centred random walk whose reflected version
# is transient.
#
# Observing a two-sided walk at its weak ascending record times gives a walk
# with nonnegative increments driving the same reflected process.  For
# centred skip-free-down laws the record-height law inverts in closed form,
# and the inversion runs backwards: prescribe a nonincreasing height law,
# reconstruct the centred base law.

import numpy as np

from reflectwalk import (Measure1D, ladder_exact_skip_free, ladder_monte_carlo,
                         recurrence_criteria, wiener_hopf_construct,
                         wiener_hopf_log_tail)

sym = Measure1D.lattice({-1: 0.5, 1: 0.5})
lad = ladder_exact_skip_free(sym)
print("symmetric +-1 walk: record-height law =", lad.ladder.atoms_dict())

mc = ladder_monte_carlo(sym, samples=20_000, rng=np.random.default_rng(5),
                        step_cap=10 ** 6)
print("Monte Carlo heights:", {k: round(v, 4)
                               for k, v in mc.ladder.atoms_dict().items()},
      f"({mc.capped_excursions} excursions hit the step cap)")

mu = wiener_hopf_construct(lad.ladder)
print("reconstructed base law:", mu.atoms_dict())

# The log-tail height family c log(x+2) / (x+2)^(3/2) is normalizable and
# nonincreasing, so it is the record-height law of a *centred* base law --
# yet it fails every sufficient recurrence condition for the reflected walk:
# the base walk is recurrent while its reflection escapes to infinity.
heights = wiener_hopf_log_tail(cutoff=200_000)
print("\nlog-tail family: normalizing constant =",
      round(heights.meta["normalizing_constant"], 6))
report = recurrence_criteria(heights)
print("recurrence criteria (each implies the next):")
print("  E(sqrt Y) finite:        ", report.cond_sqrt_moment)
print("  sum of squared tails:    ", report.cond_tail_square)
print("  tail-product limit zero: ", report.cond_tail_product)

base = wiener_hopf_construct(
    Measure1D.lattice_arrays(heights.support, heights.probs / heights.probs.sum()))
print("reconstructed base law: support starts at", int(base.min_support()),
      "mean =", round(base.mean(), 9))
