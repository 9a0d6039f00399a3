"""Ring perception: smallest set of smallest rings.

The SSSR is built greedily: for every bond, find the shortest cycle through
it (BFS in the graph with that bond removed), sort all candidate cycles by
(size, atom tuple), then keep cycles whose bond sets are linearly independent
over GF(2) until the cyclomatic number is reached. Ties are resolved by the
sort, which makes the result deterministic for a given atom numbering.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

from .mol import Molecule


def _shortest_cycle_through(mol: Molecule, a1: int, a2: int) -> Optional[list[int]]:
    """Shortest path a1..a2 avoiding the direct bond, as a cycle atom list."""
    prev: dict[int, int] = {a1: -1}
    queue = deque([a1])
    while queue:
        cur = queue.popleft()
        for nbr in mol.neighbors(cur):
            if cur == a1 and nbr == a2:
                continue  # skip the bond we are trying to close
            if nbr in prev:
                continue
            prev[nbr] = cur
            if nbr == a2:
                path = [a2]
                back = cur
                while back != -1:
                    path.append(back)
                    back = prev[back]
                return path
            queue.append(nbr)
    return None


def _cycle_bond_mask(mol: Molecule, cycle: list[int]) -> int:
    mask = 0
    n = len(cycle)
    for i in range(n):
        bond = mol.bond_between(cycle[i], cycle[(i + 1) % n])
        if bond is None:
            raise ValueError("cycle atoms are not consecutively bonded")
        mask |= 1 << bond.index
    return mask


def perceive_rings(mol: Molecule) -> list[list[int]]:
    """Compute the SSSR and annotate in_ring flags on atoms and bonds.

    Returns the list of rings; each ring is a list of atom indices in
    traversal order, rotated so the smallest index comes first and oriented
    toward its smaller second element.
    """
    n_components = len(mol.components())
    target = mol.num_bonds - mol.num_atoms + n_components
    for atom in mol.atoms:
        atom.in_ring = False
    for bond in mol.bonds:
        bond.in_ring = False
    mol.rings = []
    if target <= 0:
        return []

    candidates: list[list[int]] = []
    seen_cycles: set[tuple[int, ...]] = set()
    for bond in mol.bonds:
        cycle = _shortest_cycle_through(mol, bond.a1, bond.a2)
        if cycle is None:
            continue
        canon = _canonical_rotation(cycle)
        if tuple(canon) not in seen_cycles:
            seen_cycles.add(tuple(canon))
            candidates.append(canon)
    candidates.sort(key=lambda c: (len(c), c))

    basis: list[int] = []
    chosen: list[list[int]] = []
    for cycle in candidates:
        mask = _cycle_bond_mask(mol, cycle)
        reduced = mask
        for b in basis:
            reduced = min(reduced, reduced ^ b)
        if reduced == 0:
            continue
        basis.append(reduced)
        basis.sort(reverse=True)
        chosen.append(cycle)
        if len(chosen) == target:
            break

    mol.rings = chosen
    ring_atoms = {a for ring in chosen for a in ring}
    for idx in ring_atoms:
        mol.atoms[idx].in_ring = True
    for ring in chosen:
        m = len(ring)
        for i in range(m):
            bond = mol.bond_between(ring[i], ring[(i + 1) % m])
            assert bond is not None
            bond.in_ring = True
    return chosen


def _canonical_rotation(cycle: list[int]) -> list[int]:
    """Rotate/reflect a cycle so it starts at its min atom, smaller side first."""
    n = len(cycle)
    start = cycle.index(min(cycle))
    forward = [cycle[(start + i) % n] for i in range(n)]
    backward = [cycle[(start - i) % n] for i in range(n)]
    return forward if forward[1:] <= backward[1:] else backward


def atom_ring_sizes(mol: Molecule, atom_index: int) -> list[int]:
    """Sizes of SSSR rings containing the atom (may be empty)."""
    return sorted(len(r) for r in mol.rings if atom_index in r)


def bond_in_any_ring(mol: Molecule, a1: int, a2: int) -> bool:
    bond = mol.bond_between(a1, a2)
    return bond is not None and bond.in_ring
