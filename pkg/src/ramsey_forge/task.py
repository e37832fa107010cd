"""Subdivision targets: a base graph H plus a length for every edge."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .hypercore import Graph


@dataclass(frozen=True)
class SubdivisionTask:
    base: Graph
    sigma: tuple[int, ...]  # parallel to base.edges
    mode: str = "plain"
    case: str = "even"
    D: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(x) for x in self.sigma))
        if len(self.sigma) != self.base.n_edges:
            raise ValueError("sigma must give one length per edge of H")
        if any(x < 1 for x in self.sigma):
            raise ValueError("path lengths must be positive")
        if self.mode not in ("induced", "plain") or self.case not in ("even", "general"):
            raise ValueError(f"bad mode/case {self.mode!r}/{self.case!r}")
        if self.case == "even" and any(x % 2 for x in self.sigma):
            odd = [i for i, x in enumerate(self.sigma) if x % 2]
            raise ValueError(f"even case needs even lengths; odd at edges {odd}")
        D = self.base.max_degree() if self.D is None else int(self.D)
        if D < max(1, self.base.max_degree()):
            raise ValueError(f"D={D} below the maximum degree of H")
        object.__setattr__(self, "D", D)

    @classmethod
    def single_edge(cls, sigma: int, mode: str = "plain", case: str = "even", D: int | None = None) -> "SubdivisionTask":
        return cls(Graph(2, ((0, 1),)), (sigma,), mode, case, D)

    def window(self, i: int, L1: int, L2: int) -> tuple[int, int]:
        s = self.sigma[i]
        return (-(-s // L2), s // L1)

    def check_windows(self, L1: int, L2: int) -> None:
        for i in range(self.base.n_edges):
            lo, hi = self.window(i, L1, L2)
            if lo > hi:
                raise ValueError(f"empty window for edge {i}: [{lo}, {hi}]")

    @property
    def n_subdivided(self) -> int:
        return subdivided_order(self.base, self.sigma)

    def path_labels(self, i: int) -> list[int]:
        return subdivided_path(self.base, self.sigma, i)

    def to_json(self) -> dict:
        return {"n": self.base.n_vertices, "edges": [list(e) for e in self.base.edges], "sigma": list(self.sigma),
                "mode": self.mode, "case": self.case, "D": self.D}

    @classmethod
    def from_json(cls, d: dict) -> "SubdivisionTask":
        edges = [tuple(e) for e in d["edges"]]
        # sigma is given in the listed edge order; Graph sorts its edges
        keyed = sorted(zip([tuple(sorted(e)) for e in edges], d["sigma"]))
        g = Graph(int(d["n"]), tuple(e for e, _ in keyed))
        return cls(g, tuple(x for _, x in keyed), d.get("mode", "plain"), d.get("case", "even"), d.get("D"))


def subdivided_order(base: Graph, lengths: Sequence[int]) -> int:
    return base.n_vertices + sum(x - 1 for x in lengths)


def subdivided_path(base: Graph, lengths: Sequence[int], i: int) -> list[int]:
    """Labels along the i-th subdivided edge. Original vertices keep their
    labels; internal vertices of edge i get consecutive labels after all
    earlier edges' internal vertices."""
    offset = base.n_vertices + sum(x - 1 for x in lengths[:i])
    a, b = base.edges[i]
    return [a] + [offset + j for j in range(lengths[i] - 1)] + [b]
