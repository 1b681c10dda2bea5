"""Contact-and-connection graph construction and chromosome initializers.

Four initializers are provided: graph-guided (ccgi), uniform random (ri),
and two rearrangement repairs (fr fixes interference violations, sfr fixes
interference and stability).  The rearrangement checks use the strict
single-clearing-direction interference term: the literal per-pair term is
sequence-independent, which would turn the repair loop into a no-op.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .model import FIXING_LABELS, PartCatalog, RelationMatrices

_INF = float("inf")


class DisconnectedProduct(Exception):
    """The contact graph over non-ignored parts is not connected."""


@dataclass
class ContactConnectionGraph:
    """Nodes are non-ignored part ids; edges come from the contact matrix.

    Fixing nodes are screw/bolt-labeled parts; every edge incident to a
    fixing node is classed as a connection edge.
    """

    nodes: tuple[int, ...]
    fixing: frozenset[int]
    edges: tuple[tuple[int, int], ...]
    connection_edges: frozenset[tuple[int, int]]
    root: int
    neighbors: dict[int, tuple[int, ...]] = field(repr=False)

    def to_dot(self) -> str:
        """Graphviz DOT text; box nodes are fixing parts, red edges connections."""
        lines = ["graph product {"]
        for n in self.nodes:
            shape = "box" if n in self.fixing else "circle"
            mark = ' style=bold' if n == self.root else ""
            lines.append(f'  {n} [shape={shape}{mark}];')
        for a, b in self.edges:
            color = "red" if (a, b) in self.connection_edges else "black"
            lines.append(f'  {a} -- {b} [color={color}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_ccg(catalog: PartCatalog,
              matrices: RelationMatrices) -> ContactConnectionGraph:
    """Build the graph and pick the root (base-labeled, else largest part).

    Raises DisconnectedProduct when the contact graph has more than one
    component; no stable removal order can exist for such a product.
    """
    nodes = tuple(matrices.part_order)
    fixing = frozenset(pid for pid in nodes
                       if catalog.by_id(pid).task_label in FIXING_LABELS)
    contact = matrices.contact
    edges = []
    adj: dict[int, list[int]] = {pid: [] for pid in nodes}
    for i, a in enumerate(nodes):
        for k in range(i + 1, len(nodes)):
            if contact[i, k]:
                b = nodes[k]
                edges.append((a, b))
                adj[a].append(b)
                adj[b].append(a)
    connection = frozenset(e for e in edges
                           if e[0] in fixing or e[1] in fixing)

    if nodes:
        seen = {nodes[0]}
        queue = deque([nodes[0]])
        while queue:
            for nb in adj[queue.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        if len(seen) != len(nodes):
            missing = sorted(set(nodes) - seen)
            raise DisconnectedProduct(
                f"contact graph is disconnected; unreachable parts {missing}")

    base = catalog.base_part()
    if base is not None and not base.ignore:
        root = base.id
    else:
        root = max(nodes, key=lambda pid: (catalog.by_id(pid).size or 0.0,
                                           -pid))
    return ContactConnectionGraph(
        nodes=nodes, fixing=fixing, edges=tuple(edges),
        connection_edges=connection, root=root,
        neighbors={pid: tuple(nbs) for pid, nbs in adj.items()})


def _hop_distances(graph: ContactConnectionGraph, present: set[int],
                   root: int) -> dict[int, float]:
    dist = {pid: _INF for pid in present}
    dist[root] = 0.0
    queue = deque([root])
    while queue:
        cur = queue.popleft()
        for nb in graph.neighbors[cur]:
            if nb in present and dist[nb] == _INF:
                dist[nb] = dist[cur] + 1
                queue.append(nb)
    return dist


def ccgi_init(graph: ContactConnectionGraph,
              rng: np.random.Generator) -> np.ndarray:
    """Graph-guided initial sequence; the result is always stable.

    Repeatedly: recompute hop distances from the root over the remaining
    graph, pick a random node at maximum distance, and remove it if it is a
    fixing part - otherwise remove a random fixing neighbor that fastens it
    (the node itself when it has none).  The root is removed last.  Nodes cut
    off from the root (possible only on adversarial inputs) count as being
    at maximum distance.
    """
    present = set(graph.nodes)
    root = graph.root
    removal: list[int] = []
    while len(present) > 1:
        dist = _hop_distances(graph, present, root)
        far = max(v for k, v in dist.items() if k != root)
        candidates = sorted(k for k, v in dist.items()
                            if k != root and v == far)
        picked = candidates[rng.integers(len(candidates))]
        if picked not in graph.fixing:
            fixers = sorted(nb for nb in graph.neighbors[picked]
                            if nb in present and nb in graph.fixing
                            and nb != root)
            if fixers:
                picked = fixers[rng.integers(len(fixers))]
        removal.append(picked)
        present.remove(picked)
    removal.append(root)
    return np.array(removal[::-1], dtype=np.int64)


def random_init(catalog: PartCatalog,
                rng: np.random.Generator) -> np.ndarray:
    """Uniform random permutation of the non-ignored part ids."""
    ids = np.array(catalog.non_ignored_ids(), dtype=np.int64)
    if len(ids) == 0:
        raise ValueError("catalog has no non-ignored parts")
    return rng.permutation(ids)


def _strict_order_term(perm: np.ndarray, k: int,
                       if_layers: np.ndarray) -> bool:
    """Some single direction clears every part at positions below k."""
    return bool(if_layers[:, perm[:k], perm[k]].all(axis=1).any())


def _stability_term(perm: np.ndarray, k: int, contact: np.ndarray) -> bool:
    return bool(contact[perm[:k], perm[k]].sum() > 0)


def _rearrange(catalog: PartCatalog, matrices: RelationMatrices,
               rng: np.random.Generator, max_passes: int,
               with_stability: bool) -> np.ndarray:
    ids = np.array(matrices.part_order, dtype=np.int64)
    index = {int(pid): j for j, pid in enumerate(ids)}
    perm = np.array([index[int(x)] for x in rng.permutation(ids)],
                    dtype=np.int64)
    if_layers = matrices.interference_free.astype(bool)
    contact = matrices.contact.astype(np.int64)
    n = len(perm)
    for _ in range(max_passes):
        swapped = False
        for k in range(n - 1, 0, -1):
            if not _strict_order_term(perm, k, if_layers):
                # cannot escape what remains: delay it (random earlier slot)
                r = int(rng.integers(k))
            elif with_stability and not _stability_term(perm, k, contact):
                # stranded after all its contacts: advance it to a random
                # slot at or above its latest-removed neighbor, so one
                # support outlives it (a downward swap can never fix this)
                touching = np.flatnonzero(contact[perm[k]] > 0)
                if len(touching) == 0:
                    continue
                pos = np.flatnonzero(np.isin(perm, touching)).min()
                r = int(rng.integers(pos, n))
            else:
                continue
            perm[k], perm[r] = perm[r], perm[k]
            swapped = True
        if not swapped:
            break
    return ids[perm]


def fr_init(catalog: PartCatalog, matrices: RelationMatrices,
            rng: np.random.Generator, max_passes: int = 50) -> np.ndarray:
    """Random permutation repaired toward interference feasibility.

    Scans positions last-to-second; a violating part is swapped to a random
    earlier (later-removed) slot.  The result may still violate.
    """
    return _rearrange(catalog, matrices, rng, max_passes, with_stability=False)


def sfr_init(catalog: PartCatalog, matrices: RelationMatrices,
             rng: np.random.Generator, max_passes: int = 50) -> np.ndarray:
    """Like fr_init but also repairs the connection (stability) terms."""
    return _rearrange(catalog, matrices, rng, max_passes, with_stability=True)


INIT_METHODS = ("ri", "fr", "sfr", "ccgi")


def make_initializer(method: str, catalog: PartCatalog,
                     matrices: RelationMatrices):
    """Bind an initializer name to a ``f(rng) -> sequence`` callable."""
    if method == "ri":
        return lambda rng: random_init(catalog, rng)
    if method == "fr":
        return lambda rng: fr_init(catalog, matrices, rng)
    if method == "sfr":
        return lambda rng: sfr_init(catalog, matrices, rng)
    if method == "ccgi":
        graph = build_ccg(catalog, matrices)
        return lambda rng: ccgi_init(graph, rng)
    raise ValueError(f"unknown initializer {method!r}; "
                     f"expected one of {INIT_METHODS}")
