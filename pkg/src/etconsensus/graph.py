"""Weighted (di)graphs, Laplacians, and the spectral quantities trigger bounds need.

Every convergence rate, inter-event floor, and admissible sampling period in
this package is expressed through three numbers attached to a graph: the
algebraic connectivity ``lambda_2`` and the largest eigenvalue ``lambda_n`` of
the symmetrized Laplacian, and the induced 2-norm of the Laplacian itself.
This module builds graphs from edge lists or files, checks the structural
preconditions (strong connectivity, weight balance), and computes those
numbers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NotBalanced, NotConnected

#: Absolute tolerance on |d_out - d_in| for the weight-balance test.
BALANCE_TOL = 1e-12

#: lambda_2 at or below this means the zero eigenvalue is not simple.
CONNECTIVITY_TOL = 1e-10


@dataclass(frozen=True)
class WeightedDigraph:
    """Vertex/edge/weight structure; ``weights[i, j] > 0`` is an edge i -> j.

    Weights are nonnegative with a zero diagonal; undirected graphs are stored
    as symmetric weight matrices. Instances are immutable and safe to share
    across threads.
    """

    n: int
    weights: np.ndarray
    directed: bool = True

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("vertex count must be positive")
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise ValueError(f"weights must be {self.n}x{self.n}, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0.0):
            raise ValueError("edge weights must be nonnegative")
        if np.any(np.diag(w) != 0.0):
            raise ValueError("self-loops are not allowed (nonzero diagonal)")
        if not self.directed and not np.array_equal(w, w.T):
            raise ValueError("undirected graph requires a symmetric weight matrix")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_edges(cls, n: int, edges, directed: bool = True) -> "WeightedDigraph":
        """Build a graph from ``(i, j, w)`` triples with 0-based vertex ids.

        Rejects self-loops, out-of-range ids, nonpositive weights, and
        duplicate edges (for undirected graphs, ``(j, i)`` duplicates
        ``(i, j)``).
        """
        w = np.zeros((n, n))
        seen: set[tuple[int, int]] = set()
        for i, j, wij in edges:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}): vertex id out of range for n={n}")
            if i == j:
                raise ValueError(f"edge ({i}, {j}): self-loop")
            if float(wij) <= 0.0:
                raise ValueError(f"edge ({i}, {j}): weight must be positive, got {wij}")
            key = (i, j) if directed else (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add(key)
            w[i, j] = float(wij)
            if not directed:
                w[j, i] = float(wij)
        return cls(n=n, weights=w, directed=directed)

    @property
    def out_degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    @property
    def in_degrees(self) -> np.ndarray:
        return self.weights.sum(axis=0)

    def out_neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.weights[i] > 0.0)

    @property
    def max_out_neighbors(self) -> int:
        """Largest out-neighborhood cardinality over all vertices."""
        return int(np.max((self.weights > 0.0).sum(axis=1)))

    @property
    def max_weight(self) -> float:
        return float(self.weights.max())


@dataclass(frozen=True)
class SpectralInfo:
    """Spectral summary of a strongly connected, weight-balanced digraph.

    ``lambda2`` and ``lambda_n`` are the second-smallest and largest
    eigenvalues of the symmetrized Laplacian (L + L^T)/2; ``laplacian_norm``
    is the induced 2-norm of L itself.
    """

    lambda2: float
    lambda_n: float
    laplacian_norm: float


def laplacian(g: WeightedDigraph) -> np.ndarray:
    """Weighted Laplacian D_out - W. Row sums are zero by construction."""
    return np.diag(g.out_degrees) - g.weights


def is_weight_balanced(g: WeightedDigraph) -> bool:
    """True iff every vertex has equal out- and in-degree within ``BALANCE_TOL``."""
    return bool(np.max(np.abs(g.out_degrees - g.in_degrees)) <= BALANCE_TOL)


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            if not seen[v]:
                seen[v] = True
                queue.append(int(v))
    return seen


def is_strongly_connected(g: WeightedDigraph) -> bool:
    """True iff every vertex reaches every other along positive-weight edges."""
    if g.n == 1:
        return True
    adj = g.weights > 0.0
    return bool(_reachable(adj, 0).all() and _reachable(adj.T, 0).all())


def spectral_info(g: WeightedDigraph) -> SpectralInfo:
    """Eigen-summary of the symmetrized Laplacian.

    Raises:
        NotBalanced: if the balance test fails (no spectral claim holds then).
        NotConnected: if lambda_2 <= 1e-10, i.e. the zero eigenvalue of the
            symmetrized Laplacian is not simple.
    """
    if not is_weight_balanced(g):
        raise NotBalanced("graph is not weight-balanced; out- and in-degrees differ")
    lap = laplacian(g)
    sym_eigs = np.linalg.eigvalsh(0.5 * (lap + lap.T))
    if g.n < 2 or sym_eigs[1] <= CONNECTIVITY_TOL:
        raise NotConnected(
            "zero eigenvalue of the symmetrized Laplacian is not simple; "
            "graph is not strongly connected"
        )
    return SpectralInfo(
        lambda2=float(sym_eigs[1]),
        lambda_n=float(sym_eigs[-1]),
        laplacian_norm=float(np.linalg.norm(lap, 2)),
    )


# ---------------------------------------------------------------------------
# Plain-text graph files
# ---------------------------------------------------------------------------

def parse_graph(text: str) -> WeightedDigraph:
    """Parse the plain-text graph format.

    First content line is ``"<n> directed|undirected"``; each following line
    is one ``"i j w"`` triple. Blank lines and ``#`` comments are skipped.
    Rejects w <= 0, i == j, out-of-range ids, and duplicate edges.
    """
    lines = [
        ln.strip()
        for ln in text.splitlines()
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines:
        raise ValueError("graph file is empty")
    head = lines[0].split()
    if len(head) != 2 or head[1] not in ("directed", "undirected"):
        raise ValueError(
            f"graph header must be '<n> directed|undirected', got {lines[0]!r}"
        )
    try:
        n = int(head[0])
    except ValueError:
        raise ValueError(f"graph header: vertex count {head[0]!r} is not an integer")
    directed = head[1] == "directed"
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"graph edge line must be 'i j w', got {ln!r}")
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ValueError(f"graph edge line {ln!r} is not numeric")
        if i == j:
            raise ValueError(f"graph edge line {ln!r}: self-loop")
        edges.append((i, j, w))
    return WeightedDigraph.from_edges(n, edges, directed=directed)


def load_graph(path) -> WeightedDigraph:
    """Read a graph from a plain-text file (see :func:`parse_graph`)."""
    return parse_graph(Path(path).read_text())


# ---------------------------------------------------------------------------
# Random graph generators (test ensembles)
# ---------------------------------------------------------------------------

def random_connected_undirected(
    n: int,
    rng: np.random.Generator,
    edge_prob: float = 0.5,
    w_lo: float = 1.0,
    w_hi: float = 1.0,
) -> WeightedDigraph:
    """Random connected undirected graph: a random spanning path plus extra edges.

    The spanning path guarantees connectivity in one shot; remaining vertex
    pairs are joined independently with probability ``edge_prob``. Weights are
    uniform in [w_lo, w_hi] (unit weights by default).
    """
    w = np.zeros((n, n))

    def draw() -> float:
        return float(rng.uniform(w_lo, w_hi)) if w_hi > w_lo else w_lo

    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):
        w[a, b] = w[b, a] = draw()
    for i in range(n):
        for j in range(i + 1, n):
            if w[i, j] == 0.0 and rng.random() < edge_prob:
                w[i, j] = w[j, i] = draw()
    return WeightedDigraph(n=n, weights=w, directed=False)


def random_balanced_digraph(
    n: int,
    rng: np.random.Generator,
    extra_cycles: int = 2,
    w_lo: float = 0.5,
    w_hi: float = 1.5,
) -> WeightedDigraph:
    """Random strongly connected weight-balanced digraph.

    Built as a superposition of directed cycles with positive weights: one
    cycle through all vertices (strong connectivity) plus ``extra_cycles``
    cycles over random subsets. Each cycle adds equal weight to every node's
    out- and in-degree, so the sum is weight-balanced by construction.
    """
    w = np.zeros((n, n))

    def add_cycle(nodes: np.ndarray) -> None:
        weight = float(rng.uniform(w_lo, w_hi))
        for a, b in zip(nodes, np.roll(nodes, -1)):
            w[a, b] += weight

    add_cycle(rng.permutation(n))
    for _ in range(extra_cycles):
        size = int(rng.integers(2, n + 1))
        add_cycle(rng.permutation(n)[:size])
    return WeightedDigraph(n=n, weights=w, directed=True)
