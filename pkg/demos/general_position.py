"""
Subspaces in general position
=============================

Three lines through the origin of the plane are never in general position,
two distinct lines always are.  Four tests that should give the same
answer are run side by side, then the adapted coordinates are printed.
"""

from fractions import Fraction

from germstab import SubspaceFamily, adapt_coordinates, find_common_translate, gp_check
from germstab.general_position import METHODS
from germstab.linalg import Subspace

# %%
# Lines in the plane
# ------------------

x_axis = Subspace(2, [[1, 0]])
y_axis = Subspace(2, [[0, 1]])
diagonal = Subspace(2, [[1, 1]])

for members in ([x_axis, y_axis], [x_axis, x_axis], [x_axis, y_axis, diagonal]):
    fam = SubspaceFamily(members)
    print([str(P) for P in members], {m: gp_check(fam, m) for m in METHODS})

# %%
# Common translates
# -----------------
# General position means any choice of translates v_l + P_l meets.  For two
# transverse lines we ask for the crossing point of x-axis + (0, 3) and
# y-axis + (5, 0).

fam = SubspaceFamily([x_axis, y_axis])
z = find_common_translate(fam, [[0, 3], [5, 0]])
print("common point:", [str(c) for c in z])

# %%
# Adapted coordinates
# -------------------
# A plane and a transverse line in 3-space.  After the change of basis L,
# each member is cut out by vanishing coordinates, one block per member.

plane = Subspace(3, [[1, 0, 0], [0, 1, 0]])
line = Subspace(3, [[Fraction(1, 2), 0, 1], [0, 1, 0]])
fam = SubspaceFamily([plane, line])
ad = adapt_coordinates(fam)
print("L =", [[str(c) for c in row] for row in ad.change_of_basis.to_rows()])
print("index sets:", ad.index_sets)
print("adaptation checks out:", ad.verify(fam))
