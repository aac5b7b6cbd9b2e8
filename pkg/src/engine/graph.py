"""
Coupling graphs: checkerboard coloring, hop distances and named lattice presets.

Presets approximate the 6-, 8- and 10-qubit patches of a 4x4 square lattice.
Qubits of a preset are relabelled by (distance from the center, row-major
position), so the center qubit is always qubit 0 and is colored blue.
"""
import re
from typing import Literal, Optional, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.utils.errors import NotBipartiteError
from src.utils.logger import get_logger

logger = get_logger(__name__)

Color = Literal["red", "blue"]

# name -> (rows, cols, removed (row, col) sites)
_LATTICE_PRESETS: dict[str, tuple[int, int, tuple[tuple[int, int], ...]]] = {
    "n6": (2, 3, ()),
    "n8": (2, 4, ()),
    "n10": (3, 4, ((0, 0), (2, 3))),
}


def _nx_graph(n_qubits: int, edges) -> nx.Graph:
    for a, b in edges:
        if not (0 <= a < n_qubits and 0 <= b < n_qubits) or a == b:
            raise ValueError(f"Invalid edge ({a}, {b}) for {n_qubits} qubits")
    graph = nx.Graph()
    graph.add_nodes_from(range(n_qubits))
    graph.add_edges_from(edges)
    return graph


def checkerboard_coloring(graph: Union["QubitGraph", nx.Graph]) -> list[Color]:
    """
    Proper 2-coloring by breadth-first parity. In every connected component the
    lowest-index qubit is blue. A QubitGraph is recolored from its edges; a
    networkx graph must be labelled 0..n-1.

    Raises:
        NotBipartiteError: If the graph has an odd cycle.
    """
    if not isinstance(graph, nx.Graph):
        graph = graph.to_networkx()
    n_qubits = graph.number_of_nodes()
    if set(graph.nodes) != set(range(n_qubits)):
        raise ValueError("Qubits must be labelled 0..n-1")
    if not nx.is_bipartite(graph):
        raise NotBipartiteError(f"Coupling graph with edges {sorted(graph.edges)} is not bipartite")

    coloring: list[Color] = ["blue"] * n_qubits
    for component in nx.connected_components(graph):
        root = min(component)
        for node, hops in nx.single_source_shortest_path_length(graph, root).items():
            coloring[node] = "blue" if hops % 2 == 0 else "red"
    return coloring


def graph_center(n_qubits: int, edges) -> int:
    """Minimal-eccentricity qubit, lowest index on ties."""
    eccentricity = nx.eccentricity(_nx_graph(n_qubits, edges))
    return min(range(n_qubits), key=lambda q: (eccentricity[q], q))


class QubitGraph(BaseModel):
    """Connected, bipartite coupling graph with a designated center qubit."""
    model_config = ConfigDict(frozen=True)

    n_qubits: int = Field(..., ge=1)
    edges: tuple[tuple[int, int], ...]
    coloring: tuple[Color, ...]
    center: int = Field(default=0, ge=0)
    positions: Optional[tuple[tuple[float, float], ...]] = Field(
        default=None, description="2-D lattice coordinates, documentation only."
    )
    name: str = Field(default="custom")

    @model_validator(mode="after")
    def _validate_structure(self) -> "QubitGraph":
        for a, b in self.edges:
            if not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits) or a == b:
                raise ValueError(f"Invalid edge ({a}, {b}) for {self.n_qubits} qubits")
        if self.center >= self.n_qubits:
            raise ValueError(f"Center qubit {self.center} out of range")
        if len(self.coloring) != self.n_qubits:
            raise ValueError("Coloring must assign a color to every qubit")
        if not nx.is_connected(self.to_networkx()):
            raise ValueError("Coupling graph must be connected")
        for a, b in self.edges:
            if self.coloring[a] == self.coloring[b]:
                raise ValueError(f"Edge ({a}, {b}) joins two {self.coloring[a]} qubits")
        if self.positions is not None and len(self.positions) != self.n_qubits:
            raise ValueError("Positions must be given for every qubit")
        return self

    @classmethod
    def from_edges(
        cls,
        n_qubits: int,
        edges,
        center: Optional[int] = None,
        positions=None,
        name: str = "custom",
    ) -> "QubitGraph":
        """Builds a graph, deriving the checkerboard coloring and (if omitted) the center."""
        edges = tuple(sorted(tuple(sorted((int(a), int(b)))) for a, b in edges))
        coloring = checkerboard_coloring(_nx_graph(n_qubits, edges))
        if center is None:
            center = graph_center(n_qubits, edges) if edges else 0
        return cls(
            n_qubits=n_qubits,
            edges=edges,
            coloring=tuple(coloring),
            center=center,
            positions=None if positions is None else tuple(tuple(p) for p in positions),
            name=name,
        )

    def to_networkx(self) -> nx.Graph:
        return _nx_graph(self.n_qubits, self.edges)

    @property
    def red_qubits(self) -> tuple[int, ...]:
        return tuple(q for q, color in enumerate(self.coloring) if color == "red")

    @property
    def red_mask(self) -> int:
        """Bit mask of red qubits (Z-gate targets of the sign-flip layer)."""
        return sum(1 << q for q in self.red_qubits)


def graph_distance(graph: QubitGraph, source: int) -> list[int]:
    """Hop count from `source` to every qubit."""
    lengths = nx.single_source_shortest_path_length(graph.to_networkx(), source)
    return [lengths[q] for q in range(graph.n_qubits)]


def lattice_graph(rows: int, cols: int, removed=(), name: str = "lattice") -> QubitGraph:
    """Square-lattice patch relabelled so its center is qubit 0."""
    lattice = nx.grid_2d_graph(rows, cols)
    lattice.remove_nodes_from(removed)
    sites = sorted(lattice.nodes)  # row-major
    eccentricity = nx.eccentricity(lattice)
    center_site = min(sites, key=lambda s: (eccentricity[s], sites.index(s)))
    hops = nx.single_source_shortest_path_length(lattice, center_site)
    ordered = sorted(sites, key=lambda s: (hops[s], sites.index(s)))
    label = {site: index for index, site in enumerate(ordered)}
    edges = [(label[a], label[b]) for a, b in lattice.edges]
    positions = [(float(c), float(r)) for r, c in ordered]
    return QubitGraph.from_edges(len(ordered), edges, center=0, positions=positions, name=name)


def chain_graph(n_qubits: int, name: Optional[str] = None) -> QubitGraph:
    edges = [(q, q + 1) for q in range(n_qubits - 1)]
    positions = [(float(q), 0.0) for q in range(n_qubits)]
    return QubitGraph.from_edges(
        n_qubits, edges, positions=positions, name=name or f"chain{n_qubits}"
    )


def preset_graph(name: str) -> QubitGraph:
    """
    Named graphs: 'n6' (2x3), 'n8' (2x4), 'n10' (3x4 minus two opposite corners),
    plus 'chain<N>' and 'grid<R>x<C>'.
    """
    if name in _LATTICE_PRESETS:
        rows, cols, removed = _LATTICE_PRESETS[name]
        return lattice_graph(rows, cols, removed, name=name)
    if match := re.fullmatch(r"chain(\d+)", name):
        return chain_graph(int(match.group(1)), name=name)
    if match := re.fullmatch(r"grid(\d+)x(\d+)", name):
        return lattice_graph(int(match.group(1)), int(match.group(2)), name=name)
    raise ValueError(
        f"Unknown graph preset '{name}'. Known presets: {sorted(_LATTICE_PRESETS)}, chain<N>, grid<R>x<C>"
    )
