"""Influence trees: who gets dragged along when a large edge flips.

A midpoint whose edge is strictly largest in every triangle containing it (a
shortening-flip candidate, or a top unit diagonal) roots up to two trees, one
per adjacent triangle.  A node expands through the triangle away from its
parent whenever its edge is strictly largest there; its children are the other
two midpoints of that triangle.  Every midpoint belongs to one or two trees,
and the triangles whose midpoints lie in a single tree partition the region.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import Pt, squares_crossed, l1_length
from .triangulation import EdgeClass, Triangulation

FaceKey = frozenset  # frozenset of 3 doubled vertices


class NotARoot(Exception):
    pass


def _face_key(a: Pt, b: Pt, p: Pt) -> FaceKey:
    return frozenset((a, b, p))


def _face_mids_and_largest(face: FaceKey) -> tuple[tuple[Pt, ...], Pt]:
    """All three side midpoints of a face plus the strictly largest side's."""
    v1, v2, v3 = sorted(face)
    sides = ((v1, v2), (v1, v3), (v2, v3))
    mids = []
    lengths = []
    for s, t in sides:
        mids.append(((s[0] + t[0]) // 2, (s[1] + t[1]) // 2))
        lengths.append((abs(s[0] - t[0]) + abs(s[1] - t[1])) // 2)
    assert 2 * max(lengths) == sum(lengths)
    return tuple(mids), mids[lengths.index(max(lengths))]


def largest_midpoint(face: FaceKey) -> Pt:
    return _face_mids_and_largest(face)[1]


@dataclass
class InfluenceTree:
    root: Pt
    children: dict[Pt, tuple[Pt, ...]]
    parent: dict[Pt, Pt]                  # absent for root
    side: dict[Pt, int]                   # 1 or 2; root absent
    expansion_faces: dict[Pt, tuple[FaceKey, ...]]  # root: 1-2; others: 0-1
    nodes: frozenset = field(default_factory=frozenset)

    def leaves(self, side: int | None = None) -> list[Pt]:
        out = []
        for y in self.nodes:
            if y != self.root and not self.children.get(y):
                if side is None or self.side[y] == side:
                    out.append(y)
        return out

    @property
    def sides(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.side.values())))


def build_tree(sigma: Triangulation, x: Pt) -> InfluenceTree:
    cls = sigma.classify(x)
    if cls not in (EdgeClass.DECREASING, EdgeClass.UNIT_DIAG_TOP):
        raise NotARoot("midpoint %r is %s" % (x, cls.value))
    children: dict[Pt, tuple[Pt, ...]] = {}
    parent: dict[Pt, Pt] = {}
    side_of: dict[Pt, int] = {}
    expansion: dict[Pt, tuple[FaceKey, ...]] = {}
    visited = {x}
    root_len = l1_length(sigma.edge_of[x])

    stack: list[tuple[Pt, Pt, int, FaceKey]] = []  # (node, parent, side, creating face)
    root_faces = []
    for i, (a, b, p) in enumerate(sigma.faces_at(x), start=1):
        face = _face_key(a, b, p)
        root_faces.append(face)
        mids, largest = _face_mids_and_largest(face)
        assert largest == x, "root edge not largest in its own face"
        kids = tuple(sorted(m for m in mids if m != x))
        children[x] = children.get(x, ()) + kids
        for k in kids:
            assert k not in visited, "midpoint %r reached twice" % (k,)
            visited.add(k)
            assert l1_length(sigma.edge_of[k]) < root_len
            parent[k] = x
            side_of[k] = i
            stack.append((k, x, i, face))
    expansion[x] = tuple(root_faces)

    while stack:
        y, z, side, creating = stack.pop()
        exp_face = None
        for (a, b, p) in sigma.faces_at(y):
            fk = _face_key(a, b, p)
            if fk != creating:
                exp_face = fk
        if exp_face is None:
            children.setdefault(y, ())
            continue  # boundary edge: single triangle, leaf
        mids, largest = _face_mids_and_largest(exp_face)
        if largest != y:
            children.setdefault(y, ())
            continue
        expansion[y] = (exp_face,)
        ylen = l1_length(sigma.edge_of[y])
        kids = tuple(sorted(m for m in mids if m != y))
        children[y] = kids
        for k in kids:
            assert k not in visited, "midpoint %r reached twice" % (k,)
            visited.add(k)
            assert l1_length(sigma.edge_of[k]) < ylen
            parent[k] = y
            side_of[k] = side
            stack.append((k, y, side, exp_face))

    tree = InfluenceTree(root=x, children=children, parent=parent, side=side_of,
                         expansion_faces=expansion, nodes=frozenset(visited))
    for i in set(side_of.values()):
        total = sum(l1_length(sigma.edge_of[y]) for y in tree.leaves(i))
        assert total == root_len, \
            "side-%d leaf lengths sum to %d, root has %d" % (i, total, root_len)
    return tree


def roots_of(sigma: Triangulation, x: Pt) -> set[Pt]:
    """The roots of the 1 or 2 trees containing midpoint x."""
    faces = [_face_key(a, b, p) for (a, b, p) in sigma.faces_at(x)]
    starts = []
    for fk in faces:
        w = largest_midpoint(fk)
        if w != x:
            starts.append((w, fk))
    if not starts:
        return {x}  # largest in all containing triangles: x roots its own trees
    if len(starts) < len(faces):
        # largest in some triangle: x belongs to exactly one tree, entered
        # through the face where it is not largest
        starts = starts[:1]
    roots = set()
    for cur, shared in starts:
        prev_face = shared
        while True:
            other = None
            for (a, b, p) in sigma.faces_at(cur):
                fk = _face_key(a, b, p)
                if fk != prev_face:
                    other = fk
            if other is None:
                break  # single triangle: cur is a root
            w = largest_midpoint(other)
            if w == cur:
                break  # largest in both triangles: root
            assert l1_length(sigma.edge_of[w]) > l1_length(sigma.edge_of[cur])
            prev_face = other
            cur = w
        assert sigma.classify(cur) in (EdgeClass.DECREASING, EdgeClass.UNIT_DIAG_TOP)
        roots.add(cur)
    assert 1 <= len(roots) <= 2
    return roots


def partition_regions(sigma: Triangulation) -> dict[Pt, tuple[FaceKey, ...]]:
    """Assign every triangle to the root of the unique tree owning it."""
    owned: dict[Pt, list[FaceKey]] = {}
    total = 0
    for face in sigma.faces():
        y = largest_midpoint(face)
        rs = roots_of(sigma, y)
        assert len(rs) == 1, "largest midpoint %r in two trees" % (y,)
        owned.setdefault(next(iter(rs)), []).append(face)
        total += 1
    assert total == sigma.region.twice_area
    return {r: tuple(sorted(fs, key=sorted)) for r, fs in owned.items()}


def partition_definitional_check(sigma: Triangulation) -> bool:
    """Slow cross-check: rebuild the partition from tree node sets."""
    roots = [x for x in sigma.region.midpoints
             if sigma.classify(x) in (EdgeClass.DECREASING, EdgeClass.UNIT_DIAG_TOP)]
    trees = {r: build_tree(sigma, r) for r in roots}
    fast = partition_regions(sigma)
    if set(fast) - set(trees):
        return False
    seen = set()
    for face in sigma.faces():
        mids = _face_mids_and_largest(face)[0]
        holders = [r for r, t in trees.items() if all(m in t.nodes for m in mids)]
        if len(holders) != 1:
            return False
        if face not in fast.get(holders[0], ()):
            return False
        seen.add(face)
    return sum(len(fs) for fs in fast.values()) == len(seen)


def s_nesting_check(sigma: Triangulation, tree: InfluenceTree) -> bool:
    """Squares crossed by a child edge nest strictly inside its parent's."""
    for y, z in tree.parent.items():
        sy = squares_crossed(sigma.edge_of[y])
        sz = squares_crossed(sigma.edge_of[z])
        if not sy <= sz:
            return False
        if sz and not sy < sz:
            return False
    return True


def smallest_edge_hierarchy_check(sigma: Triangulation, tree: InfluenceTree) -> bool:
    """Smallest-edge lengths of tree triangles decrease away from the root."""
    def smallest(face: FaceKey) -> int:
        v1, v2, v3 = sorted(face)
        return min((abs(s[0] - t[0]) + abs(s[1] - t[1])) // 2
                   for s, t in ((v1, v2), (v1, v3), (v2, v3)))

    for y in tree.expansion_faces:
        if y == tree.root:
            continue
        anc = tree.parent.get(y)
        while anc is not None:
            for fa in tree.expansion_faces.get(anc, ()):
                for fy in tree.expansion_faces[y]:
                    if smallest(fa) < smallest(fy):
                        return False
            anc = tree.parent.get(anc)
    return True
