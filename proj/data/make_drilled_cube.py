"""Writes drilled_cube.geo: the cube [-1,1]^3 with a square hole of half-width
1/2 along the z-axis, as 16 flat bilinear patches."""

OUTER, INNER = 1.0, 0.5


def square(r):
    # counter-clockwise corners in the xy-plane
    return [(r, -r), (r, r), (-r, r), (-r, -r)]


patches = []
out_sq, in_sq = square(OUTER), square(INNER)
for k in range(4):
    a, b = out_sq[k], out_sq[(k + 1) % 4]
    patches.append([(*a, -1), (*b, -1), (*a, 1), (*b, 1)])          # outer wall
    a, b = in_sq[k], in_sq[(k + 1) % 4]
    patches.append([(*b, -1), (*a, -1), (*b, 1), (*a, 1)])          # hole wall
    oa, ob, ia, ib = out_sq[k], out_sq[(k + 1) % 4], in_sq[k], in_sq[(k + 1) % 4]
    patches.append([(*ia, 1), (*ib, 1), (*oa, 1), (*ob, 1)])        # top ring
    patches.append([(*ib, -1), (*ia, -1), (*ob, -1), (*oa, -1)])    # bottom ring

with open("drilled_cube.geo", "w") as f:
    f.write("# drilled cube, 16 bilinear patches\n")
    f.write(f"multipatch {len(patches)}\n")
    for c00, c10, c01, c11 in patches:
        f.write("patch 1 1 2 2\n0 0 1 1\n0 0 1 1\n")
        # (l1, l2) with l2 fastest: (0,0) (0,1) (1,0) (1,1)
        for c in (c00, c01, c10, c11):
            f.write(" ".join(repr(float(v)) for v in c) + " 1\n")
