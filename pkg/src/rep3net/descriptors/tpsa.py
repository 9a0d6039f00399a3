"""Topological polar surface area from fragment contributions.

Published N/O/S/P fragment values keyed on element, charge, hydrogen count
and incident bond orders. Atoms matching no fragment contribute zero.
Charge-separated nitro groups keep their written form, so their N
contributes the charged-nitrogen value (toolkits that normalize nitro to
the neutral pentavalent form report a slightly different sum).
"""

from __future__ import annotations

from ..chem.mol import BondOrder, Molecule
from ..chem.rings import atom_ring_sizes


def _bond_profile(mol: Molecule, idx: int) -> tuple[int, int, int, int]:
    """(single, double, triple, aromatic) incident bond counts."""
    s = d = t = a = 0
    for bond in mol.bonds_of(idx):
        if bond.order is BondOrder.SINGLE:
            s += 1
        elif bond.order is BondOrder.DOUBLE:
            d += 1
        elif bond.order is BondOrder.TRIPLE:
            t += 1
        else:
            a += 1
    return s, d, t, a


def _nitrogen(mol: Molecule, idx: int) -> float:
    atom = mol.atoms[idx]
    h = atom.total_h
    q = atom.formal_charge
    s, d, t, a = _bond_profile(mol, idx)
    in_3ring = 3 in atom_ring_sizes(mol, idx)
    if atom.aromatic:
        if q == 0:
            if h == 0 and a == 3:
                return 4.41
            if h == 0 and a == 2 and s == 1:
                return 4.93
            if h == 0 and a == 2 and d == 1:
                return 8.39
            if h == 0 and a == 2:
                return 12.89
            if h == 1 and a == 2:
                return 15.79
        elif q == 1:
            if h == 0 and a == 3:
                return 4.10
            if h == 0 and a == 2 and s == 1:
                return 3.88
            if h == 1 and a == 2:
                return 14.14
        return 0.0
    if q == 0:
        if h == 0:
            if (s, d, t) == (3, 0, 0):
                return 3.01 if in_3ring else 3.24
            if (s, d, t) == (1, 1, 0):
                return 12.36
            if (s, d, t) == (0, 0, 1):
                return 23.79
            if (s, d, t) == (1, 2, 0):
                return 11.68
            if (s, d, t) == (0, 1, 1):
                return 13.60
        elif h == 1:
            if (s, d, t) == (2, 0, 0):
                return 21.94 if in_3ring else 12.03
            if (s, d, t) == (0, 1, 0):
                return 23.85
        elif h == 2 and (s, d, t) == (1, 0, 0):
            return 26.02
    elif q == 1:
        if h == 0:
            if (s, d, t) == (4, 0, 0):
                return 0.0
            if (s, d, t) == (2, 1, 0):
                return 3.01
            if (s, d, t) == (1, 0, 1):
                return 4.36
        elif h == 1:
            if (s, d, t) == (3, 0, 0):
                return 4.44
            if (s, d, t) == (1, 1, 0):
                return 13.97
        elif h == 2:
            if (s, d, t) == (2, 0, 0):
                return 16.61
            if (s, d, t) == (0, 1, 0):
                return 25.59
        elif h == 3 and (s, d, t) == (1, 0, 0):
            return 27.64
    return 0.0


def _oxygen(mol: Molecule, idx: int) -> float:
    atom = mol.atoms[idx]
    h = atom.total_h
    q = atom.formal_charge
    s, d, t, a = _bond_profile(mol, idx)
    if atom.aromatic:
        return 13.14
    if q == 0:
        if h == 0:
            if (s, d) == (2, 0):
                return 12.53 if 3 in atom_ring_sizes(mol, idx) else 9.23
            if (s, d) == (0, 1):
                return 17.07
        elif h == 1 and (s, d) == (1, 0):
            return 20.23
        elif h == 2 and (s, d) == (0, 0):
            return 0.0  # water carries no fragment in the published table
    elif q == -1 and h == 0 and (s, d) == (1, 0):
        return 23.06
    return 0.0


def _sulfur(mol: Molecule, idx: int) -> float:
    atom = mol.atoms[idx]
    h = atom.total_h
    s, d, t, a = _bond_profile(mol, idx)
    if atom.aromatic:
        if d == 1:
            return 21.70
        return 28.24
    if atom.formal_charge != 0:
        return 0.0
    if h == 0:
        if (s, d) == (2, 0):
            return 25.30
        if (s, d) == (0, 1):
            return 32.09
        if (s, d) == (2, 1):
            return 19.21
        if (s, d) == (2, 2):
            return 8.38
    elif h == 1 and (s, d) == (1, 0):
        return 38.80
    return 0.0


def _phosphorus(mol: Molecule, idx: int) -> float:
    atom = mol.atoms[idx]
    if atom.aromatic or atom.formal_charge != 0:
        return 0.0
    h = atom.total_h
    s, d, t, a = _bond_profile(mol, idx)
    if h == 0:
        if (s, d) == (3, 0):
            return 13.59
        if (s, d) == (1, 1):
            return 34.14
        if (s, d) == (3, 1):
            return 9.81
    elif h == 1 and (s, d) == (2, 1):
        return 23.47
    return 0.0


_HANDLERS = {"N": _nitrogen, "O": _oxygen, "S": _sulfur, "P": _phosphorus}


def tpsa(mol: Molecule) -> float:
    total = 0.0
    for atom in mol.atoms:
        handler = _HANDLERS.get(atom.symbol)
        if handler is not None:
            total += handler(mol, atom.index)
    return total
