"""Finite algebra of Borel-set descriptions in the complex plane.

Regions are trees of primitives (disks, half-planes, finite point sets,
full, empty) under complement, union and intersection.  Membership is
total and deterministic.  Translation and conjugation act leafwise, so
the algebra is closed under both.

Two geometric queries matter downstream and carry documented
approximation semantics:

``boundary_distance(z)``
    A lower bound on the distance from z to the topological boundary,
    computed as the minimum over primitive-leaf boundaries.  Boolean
    combinations can only erase boundary pieces, never create new ones,
    so the bound is safe (conservative) for ambiguity detection.

``distance(z)``
    Distance from z to the closure of the region.  Exact on primitives
    and unions; on intersections the maximum of child distances is used,
    a lower bound that is exact whenever one constraint binds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

__all__ = ["Region", "disk", "halfplane", "points", "full", "empty",
           "complement", "union", "intersection"]


@dataclass(frozen=True)
class Region:
    """Immutable region-algebra node.

    kind is one of disk, halfplane, points, full, empty, not, or, and.
    Half-planes are ``{z : Re(conj(normal) z) <= offset}`` with unit
    normal; ``closed`` distinguishes the boundary convention, which only
    matters within the ambiguity band of classification.
    """

    kind: str
    center: complex = 0j
    radius: float = 0.0
    normal: complex = 1 + 0j
    offset: float = 0.0
    pts: tuple = ()
    closed: bool = True
    children: tuple = ()

    # -- membership -------------------------------------------------

    def contains(self, z: complex) -> bool:
        k = self.kind
        if k == "full":
            return True
        if k == "empty":
            return False
        if k == "disk":
            d = abs(z - self.center)
            return d <= self.radius if self.closed else d < self.radius
        if k == "halfplane":
            v = (self.normal.conjugate() * z).real
            return v <= self.offset if self.closed else v < self.offset
        if k == "points":
            return any(z == p for p in self.pts)
        if k == "not":
            return not self.children[0].contains(z)
        if k == "or":
            return any(c.contains(z) for c in self.children)
        if k == "and":
            return all(c.contains(z) for c in self.children)
        raise ValueError(f"unknown region kind {k!r}")

    # -- classification with a tolerance band ------------------------

    def classify(self, z: complex, tol: float):
        """Return (inside, ambiguous) for z at boundary tolerance tol.

        Point sets match within tol (an eigenvalue sitting on a listed
        atom is a member, not a boundary case); their ambiguity band is
        (tol, 3 tol).  All other primitives flag |signed margin| < tol.
        """
        k = self.kind
        if k == "full":
            return True, False
        if k == "empty":
            return False, False
        if k == "disk":
            m = self.radius - abs(z - self.center)
            return (m >= 0 if self.closed else m > 0), abs(m) < tol
        if k == "halfplane":
            m = self.offset - (self.normal.conjugate() * z).real
            return (m >= 0 if self.closed else m > 0), abs(m) < tol
        if k == "points":
            d = min((abs(z - p) for p in self.pts), default=math.inf)
            return d <= tol, tol < d < 3 * tol
        if k == "not":
            inside, amb = self.children[0].classify(z, tol)
            return not inside, amb
        results = [c.classify(z, tol) for c in self.children]
        amb = any(a for _, a in results)
        if k == "or":
            return any(i for i, _ in results), amb
        if k == "and":
            return all(i for i, _ in results), amb
        raise ValueError(f"unknown region kind {k!r}")

    # -- geometry -----------------------------------------------------

    def boundary_distance(self, z: complex) -> float:
        k = self.kind
        if k in ("full", "empty"):
            return math.inf
        if k == "disk":
            return abs(abs(z - self.center) - self.radius)
        if k == "halfplane":
            return abs((self.normal.conjugate() * z).real - self.offset)
        if k == "points":
            return min((abs(z - p) for p in self.pts), default=math.inf)
        if k == "not":
            return self.children[0].boundary_distance(z)
        return min(c.boundary_distance(z) for c in self.children)

    def distance(self, z: complex) -> float:
        """Distance from z to the closure of the region (lower bound)."""
        k = self.kind
        if k == "full":
            return 0.0
        if k == "empty":
            return math.inf
        if k == "disk":
            return max(0.0, abs(z - self.center) - self.radius)
        if k == "halfplane":
            return max(0.0, (self.normal.conjugate() * z).real - self.offset)
        if k == "points":
            return min((abs(z - p) for p in self.pts), default=math.inf)
        if k == "not":
            c = self.children[0]
            # distance to the closed complement of each primitive
            if c.kind == "disk":
                return max(0.0, c.radius - abs(z - c.center))
            if c.kind == "halfplane":
                return max(0.0, c.offset - (c.normal.conjugate() * z).real)
            if c.kind == "points":
                return 0.0  # complement of a finite set is dense
            if c.kind == "full":
                return math.inf
            if c.kind == "empty":
                return 0.0
            if c.kind == "not":
                return c.children[0].distance(z)
            if c.kind == "or":
                return intersection(*[complement(x) for x in c.children]).distance(z)
            if c.kind == "and":
                return union(*[complement(x) for x in c.children]).distance(z)
        if k == "or":
            return min(c.distance(z) for c in self.children)
        if k == "and":
            return max(c.distance(z) for c in self.children)
        raise ValueError(f"unknown region kind {k!r}")

    # -- maps ---------------------------------------------------------

    def translate(self, lam: complex) -> "Region":
        """The region shifted by lam (B + lam)."""
        k = self.kind
        if k in ("full", "empty"):
            return self
        if k == "disk":
            return Region("disk", center=self.center + lam, radius=self.radius, closed=self.closed)
        if k == "halfplane":
            off = self.offset + (self.normal.conjugate() * lam).real
            return Region("halfplane", normal=self.normal, offset=off, closed=self.closed)
        if k == "points":
            return Region("points", pts=tuple(p + lam for p in self.pts))
        return Region(k, children=tuple(c.translate(lam) for c in self.children))

    def conjugate(self) -> "Region":
        """The image of the region under complex conjugation (B^*)."""
        k = self.kind
        if k in ("full", "empty"):
            return self
        if k == "disk":
            return Region("disk", center=self.center.conjugate(), radius=self.radius, closed=self.closed)
        if k == "halfplane":
            return Region("halfplane", normal=self.normal.conjugate(), offset=self.offset, closed=self.closed)
        if k == "points":
            return Region("points", pts=tuple(p.conjugate() for p in self.pts))
        return Region(k, children=tuple(c.conjugate() for c in self.children))

    # -- serialization -------------------------------------------------

    def to_json_obj(self) -> dict:
        k = self.kind
        if k == "disk":
            return {"disk": {"center": [self.center.real, self.center.imag],
                             "radius": self.radius, "closed": self.closed}}
        if k == "halfplane":
            return {"halfplane": {"normal": [self.normal.real, self.normal.imag],
                                  "offset": self.offset, "closed": self.closed}}
        if k == "points":
            return {"points": [[p.real, p.imag] for p in self.pts]}
        if k in ("full", "empty"):
            return {k: {}}
        if k == "not":
            return {"not": self.children[0].to_json_obj()}
        return {k: [c.to_json_obj() for c in self.children]}

    @staticmethod
    def from_json_obj(obj: dict) -> "Region":
        (tag, body), = obj.items()
        if tag == "disk":
            return Region("disk", center=complex(*body["center"]),
                          radius=float(body["radius"]), closed=bool(body.get("closed", True)))
        if tag == "halfplane":
            return Region("halfplane", normal=complex(*body["normal"]),
                          offset=float(body["offset"]), closed=bool(body.get("closed", True)))
        if tag == "points":
            return Region("points", pts=tuple(complex(*p) for p in body))
        if tag in ("full", "empty"):
            return Region(tag)
        if tag == "not":
            return Region("not", children=(Region.from_json_obj(body),))
        if tag in ("or", "and"):
            return Region(tag, children=tuple(Region.from_json_obj(c) for c in body))
        raise ValueError(f"unknown region tag {tag!r}")

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @staticmethod
    def from_json(s: str) -> "Region":
        return Region.from_json_obj(json.loads(s))


def disk(center: complex, radius: float, closed: bool = True) -> Region:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    return Region("disk", center=complex(center), radius=float(radius), closed=closed)


def halfplane(normal: complex, offset: float, closed: bool = True) -> Region:
    n = complex(normal)
    a = abs(n)
    if a == 0:
        raise ValueError("normal must be nonzero")
    return Region("halfplane", normal=n / a, offset=float(offset) / a, closed=closed)


def points(*pts: complex) -> Region:
    return Region("points", pts=tuple(complex(p) for p in pts))


def full() -> Region:
    return Region("full")


def empty() -> Region:
    return Region("empty")


def complement(r: Region) -> Region:
    if r.kind == "not":
        return r.children[0]
    return Region("not", children=(r,))


def union(*rs: Region) -> Region:
    return Region("or", children=tuple(rs))


def intersection(*rs: Region) -> Region:
    return Region("and", children=tuple(rs))
