# Parity cosets and essential classes of two-dimensional reflected walks.
#
# On lattice coordinates the reflection x -> |x - y| changes parities by the
# parity of y, so the mod-2 images of the support generate a subgroup of
# {0,1}^2 whose cosets the walk can never leave.  Within each coset part the
# walk is absorbed by one closed communicating class, and those classes can
# be surprisingly irregular near the origin.

from reflectwalk import JointMeasure, essential_classes, parity_group
from reflectwalk.lattice_structure import hypercube_chain

LAWS = {
    "(a) jumps (2,3) and (3,2)": [((2, 3), 0.5), ((3, 2), 0.5)],
    "(b) jumps (-1,2) and (2,-1)": [((-1, 2), 0.5), ((2, -1), 0.5)],
    "(c) jumps (-1,3) and (3,-1)": [((-1, 3), 0.5), ((3, -1), 0.5)],
}

for name, atoms in LAWS.items():
    j = JointMeasure.finite((2, 0, 0, 0), atoms)
    dec = parity_group(j)
    print(f"\n{name}")
    print("  parity group:", [tuple(map(int, g)) for g in dec.group],
          f"-> {dec.n_cosets} coset(s)")
    for rep in essential_classes(j, window=8):
        members = rep.member_set()
        print(f"  coset {rep.coset_index} [{rep.certificate}]: "
              f"{len(members)} class members in [0,8]^2")
        if rep.transient_classes:
            print("    transient classes:", rep.transient_classes)

# Law (a) is bounded: the orbit space is provably inside {0..3}^2, and the
# class structure there is exact: three communicating classes, one of which
# is closed -- the other two (containing the origin and the corner (3,3))
# leak into it.
j = JointMeasure.finite((2, 0, 0, 0), LAWS["(a) jumps (2,3) and (3,2)"])
rep = essential_classes(j, window=20)[0]
print("\nlaw (a): essential class =", sorted(rep.member_set()))

# The parity process itself is a tiny random walk on the hypercube; the
# uniform law on each coset is stationary for it.
kernel, pmf, dec = hypercube_chain(j)
print("\nparity kernel of law (a):\n", kernel)
