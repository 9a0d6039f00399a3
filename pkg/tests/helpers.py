"""Shared oracles for the test suite.

Everything here is deliberately independent of the package internals: graph
comparisons go through networkx, path sums through BFS, statistics through
scipy. Tests freeze expected values against these, not against the code
under test.
"""

from __future__ import annotations

from pathlib import Path

import networkx as nx

DATA_DIR = Path(__file__).parent / "data"


def load_corpus() -> list[str]:
    lines = (DATA_DIR / "corpus.smi").read_text().splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]


def mol_to_nx(mol) -> nx.Graph:
    g = nx.Graph()
    for atom in mol.atoms:
        g.add_node(
            atom.index,
            symbol=atom.symbol,
            charge=atom.formal_charge,
            hs=atom.total_h,
            aromatic=atom.aromatic,
        )
    for bond in mol.bonds:
        g.add_edge(bond.a1, bond.a2, order=bond.order.value)
    return g


def mols_isomorphic(m1, m2) -> bool:
    """Attribute-aware graph isomorphism via networkx VF2."""
    node_match = nx.algorithms.isomorphism.categorical_node_match(
        ["symbol", "charge", "hs", "aromatic"], [None, None, None, None]
    )
    edge_match = nx.algorithms.isomorphism.categorical_edge_match("order", None)
    return nx.is_isomorphic(
        mol_to_nx(m1), mol_to_nx(m2), node_match=node_match, edge_match=edge_match
    )


def cycle_space_rank(mol) -> int:
    """Independent ring count: dimension of the cycle space."""
    g = mol_to_nx(mol)
    return g.number_of_edges() - g.number_of_nodes() + nx.number_connected_components(g)


def minimum_cycle_sizes(mol) -> list[int]:
    """Sorted sizes of a minimum cycle basis (matches SSSR sizes)."""
    g = mol_to_nx(mol)
    return sorted(len(c) for c in nx.minimum_cycle_basis(g))


def bfs_wiener_index(mol) -> int:
    """Sum of pairwise shortest-path distances over heavy atoms."""
    g = mol_to_nx(mol)
    total = 0
    for _, lengths in nx.all_pairs_shortest_path_length(g):
        total += sum(lengths.values())
    return total // 2
