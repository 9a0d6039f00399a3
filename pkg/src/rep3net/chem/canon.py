"""Canonical atom ranking and SMILES emission.

Ranking is Morgan-style iterative refinement: atoms start from an invariant
tuple (atomic number, degree, charge, H count, aromatic flag, isotope) and
ranks are refined by sorted neighbor (rank, bond order) multisets until the
partition is stable. Remaining ties are broken by promoting the
minimum-index atom of the smallest tied class and re-refining, which is
deterministic and, for the symmetric molecules we care about, permutation
invariant (tied classes are automorphism orbits in practice).

The writer emits one DFS tree per fragment, children in rank order, ring
closures as back edges with min-free-digit allocation, and re-derivable
hydrogen counts left implicit.
"""

from __future__ import annotations

import heapq
import math
from typing import Sequence

from .elements import ORGANIC_SUBSET, allowed_valences
from .mol import BondOrder, Molecule

_BARE_AROMATIC = {"B", "C", "N", "O", "P", "S"}

_BOND_SYMBOL = {
    BondOrder.DOUBLE: "=",
    BondOrder.TRIPLE: "#",
}


def _dense_ranks(keys: Sequence) -> list[int]:
    lookup = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [lookup[k] for k in keys]


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    """Neighborhood refinement to a fixed partition."""
    while True:
        keys = []
        for atom in mol.atoms:
            idx = atom.index
            nbr_key = sorted(
                (ranks[n], mol.bond_between(idx, n).order.value)
                for n in mol.neighbors(idx)
            )
            keys.append((ranks[idx], tuple(nbr_key)))
        new_ranks = _dense_ranks(keys)
        if len(set(new_ranks)) == len(set(ranks)):
            return new_ranks
        ranks = new_ranks


def canonical_ranks(mol: Molecule) -> list[int]:
    """Distinct canonical rank per atom (0 .. n-1)."""
    if mol.num_atoms == 0:
        raise ValueError("empty molecule has no canonical ranks")
    keys = [
        (a.atomic_number, mol.degree(a.index), a.formal_charge, a.total_h,
         a.aromatic, a.isotope)
        for a in mol.atoms
    ]
    ranks = _refine(mol, _dense_ranks(keys))
    n = mol.num_atoms
    while len(set(ranks)) < n:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        chosen = min(i for i, r in enumerate(ranks) if r == tied)
        ranks = [2 * r for r in ranks]
        ranks[chosen] -= 1
        ranks = _refine(mol, _dense_ranks(ranks))
    return ranks


def _bare_hydrogens(mol: Molecule, idx: int) -> int:
    """H count the parser would infer for this atom written without brackets."""
    atom = mol.atoms[idx]
    vals = allowed_valences(atom.symbol, 0)
    if not vals:
        return -1
    if atom.aromatic:
        return max(0, vals[0] - 1 - mol.degree(idx))
    order_sum = math.ceil(mol.bond_order_sum(idx) - 1e-9)
    target = next((v for v in vals if v >= order_sum), None)
    return -1 if target is None else target - order_sum


def _atom_token(mol: Molecule, idx: int) -> str:
    atom = mol.atoms[idx]
    sym = atom.symbol
    bare_ok = (
        sym in ORGANIC_SUBSET
        and atom.formal_charge == 0
        and atom.isotope == 0
        and atom.num_radical_electrons == 0
        and _bare_hydrogens(mol, idx) == atom.total_h
        and (not atom.aromatic or sym in _BARE_AROMATIC)
    )
    written = sym.lower() if atom.aromatic else sym
    if bare_ok:
        return written
    body = ""
    if atom.isotope:
        body += str(atom.isotope)
    body += written
    h = atom.total_h
    if h == 1:
        body += "H"
    elif h > 1:
        body += f"H{h}"
    charge = atom.formal_charge
    if charge == 1:
        body += "+"
    elif charge == -1:
        body += "-"
    elif charge > 1:
        body += f"+{charge}"
    elif charge < -1:
        body += f"-{-charge}"
    return f"[{body}]"


def _bond_token(mol: Molecule, a1: int, a2: int) -> str:
    bond = mol.bond_between(a1, a2)
    assert bond is not None
    if bond.order is BondOrder.AROMATIC:
        return ""
    if bond.order is BondOrder.SINGLE:
        # explicit single keeps biphenyl-type connectors from reading aromatic
        if mol.atoms[a1].aromatic and mol.atoms[a2].aromatic:
            return "-"
        return ""
    return _BOND_SYMBOL[bond.order]


def _digit_token(digit: int) -> str:
    if digit < 10:
        return str(digit)
    if digit < 100:
        return f"%{digit:02d}"
    raise ValueError("more than 99 simultaneously open ring bonds")


def _write_fragment(mol: Molecule, ranks: list[int], root: int) -> str:
    children: dict[int, list[int]] = {}
    opens_at: dict[int, list[tuple[int, int]]] = {}   # opener -> [(closer, bond idx)]
    closes_at: dict[int, list[tuple[int, int]]] = {}  # closer -> [(opener, bond idx)]
    preorder_pos: dict[int, int] = {root: 0}
    used_bonds: set[int] = set()
    visited = {root}

    def nbr_iter(a: int):
        return iter(sorted(mol.neighbors(a), key=lambda n: ranks[n]))

    stack = [(root, nbr_iter(root))]
    while stack:
        cur, it = stack[-1]
        descended = False
        for nbr in it:
            bond = mol.bond_between(cur, nbr)
            if bond.index in used_bonds:
                continue
            used_bonds.add(bond.index)
            if nbr in visited:
                opens_at.setdefault(nbr, []).append((cur, bond.index))
                closes_at.setdefault(cur, []).append((nbr, bond.index))
            else:
                visited.add(nbr)
                preorder_pos[nbr] = len(preorder_pos)
                children.setdefault(cur, []).append(nbr)
                stack.append((nbr, nbr_iter(nbr)))
                descended = True
                break
        if not descended:
            stack.pop()

    # allocate ring-closure digits in preorder, smallest free digit first
    digit_of: dict[int, int] = {}
    free: list[int] = list(range(1, 100))
    heapq.heapify(free)
    for atom_idx in sorted(preorder_pos, key=preorder_pos.get):
        for _, bond_idx in sorted(
            closes_at.get(atom_idx, ()), key=lambda t: digit_of[t[1]]
        ):
            heapq.heappush(free, digit_of[bond_idx])
        for _, bond_idx in sorted(
            opens_at.get(atom_idx, ()), key=lambda t: preorder_pos[t[0]]
        ):
            digit_of[bond_idx] = heapq.heappop(free)

    def atom_text(a: int) -> str:
        parts = [_atom_token(mol, a)]
        for _, bond_idx in sorted(closes_at.get(a, ()), key=lambda t: digit_of[t[1]]):
            parts.append(_digit_token(digit_of[bond_idx]))
        for closer, bond_idx in sorted(
            opens_at.get(a, ()), key=lambda t: preorder_pos[t[0]]
        ):
            parts.append(_bond_token(mol, a, closer) + _digit_token(digit_of[bond_idx]))
        return "".join(parts)

    out: list[str] = []
    work: list[tuple[str, object]] = [("atom", root)]
    while work:
        kind, payload = work.pop()
        if kind == "text":
            out.append(payload)  # type: ignore[arg-type]
            continue
        a = payload  # type: ignore[assignment]
        out.append(atom_text(a))
        kids = children.get(a, [])
        pending: list[tuple[str, object]] = []
        for pos, child in enumerate(kids):
            sym = _bond_token(mol, a, child)
            if pos == len(kids) - 1:
                pending.append(("text", sym))
                pending.append(("atom", child))
            else:
                pending.append(("text", "(" + sym))
                pending.append(("atom", child))
                pending.append(("text", ")"))
        work.extend(reversed(pending))
    return "".join(out)


def _smiles_with_ranks(mol: Molecule, ranks: list[int]) -> str:
    fragments = []
    for comp in mol.components():
        root = min(comp, key=lambda i: ranks[i])
        fragments.append(_write_fragment(mol, ranks, root))
    return ".".join(sorted(fragments))


def canonical_smiles(mol: Molecule) -> str:
    """Deterministic SMILES, identical for all atom orderings of a molecule."""
    return _smiles_with_ranks(mol, canonical_ranks(mol))


def randomized_smiles(mol: Molecule, rng) -> str:
    """Valid but randomly rooted/ordered SMILES; for round-trip testing."""
    n = mol.num_atoms
    ranks = [int(r) for r in rng.permutation(n)]
    return _smiles_with_ranks(mol, ranks)
