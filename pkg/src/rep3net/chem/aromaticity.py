"""Hueckel-style aromaticity perception.

Each SSSR ring of size 5-7 is tested independently: every ring atom
contributes 0, 1 or 2 pi electrons (or disqualifies the ring), and the ring
is aromatic when the total is 4n+2. Aromatic rings get aromatic atoms and
aromatic bond orders; provisional aromatic bonds outside any aromatic ring
(e.g. the biphenyl connector) are demoted to single.

Per-ring counting cannot see multi-ring pi systems, so azulene-type
molecules whose aromaticity spans fused rings are rejected when written in
lowercase form.
"""

from __future__ import annotations

from typing import Optional

from ..exceptions import ValenceError
from .mol import BondOrder, Molecule

_HUECKEL_COUNTS = (2, 6, 10, 14)

_PYRROLE_LIKE = ("N", "P", "As")
_FURAN_LIKE = ("O", "S", "Se", "Te")


def _pi_contribution(mol: Molecule, idx: int) -> Optional[int]:
    """Pi electrons the atom donates to its ring, or None if it disqualifies."""
    atom = mol.atoms[idx]
    sym = atom.symbol
    charge = atom.formal_charge
    doubles = []
    for bond in mol.bonds_of(idx):
        if bond.order is BondOrder.TRIPLE:
            return None
        if bond.order is BondOrder.DOUBLE:
            doubles.append(bond)

    if atom.aromatic:
        # lowercase input form: contributions follow the element directly
        for bond in doubles:
            if not mol.atoms[bond.other(idx)].in_ring:
                return 0  # exocyclic double bond holds the pi electron
        if sym == "C":
            if charge > 0:
                return 0
            return 2 if charge < 0 else 1
        if sym in _PYRROLE_LIKE:
            if charge > 0:
                return 1
            if charge < 0:
                return 2
            sigma = mol.degree(idx) + atom.total_h
            return 2 if sigma == 3 else 1
        if sym in _FURAN_LIKE:
            return 1 if charge > 0 else 2
        if sym == "B":
            return 0
        return None

    # Kekule form
    if len(doubles) >= 2:
        return None  # cumulated double bonds, sp center
    if doubles:
        other = doubles[0].other(idx)
        return 1 if mol.atoms[other].in_ring else 0
    if sym == "C":
        if charge < 0:
            return 2
        if charge > 0:
            return 0
        return None  # saturated carbon blocks the ring
    if sym in _PYRROLE_LIKE:
        return None if charge > 0 else 2
    if sym in _FURAN_LIKE:
        return None if charge > 0 else 2
    if sym == "B" and charge == 0:
        return 0
    return None


def perceive_aromaticity(mol: Molecule) -> None:
    """Mark aromatic atoms/bonds in place. Requires rings to be perceived.

    Raises ValenceError when lowercase-input atoms end up outside every
    aromatic ring (non-ring aromatic atoms, or rings that fail the electron
    count).
    """
    input_aromatic = [a.aromatic for a in mol.atoms]

    aromatic_rings: list[list[int]] = []
    for ring in mol.rings:
        if not 5 <= len(ring) <= 7:
            continue
        total = 0
        ok = True
        for idx in ring:
            contrib = _pi_contribution(mol, idx)
            if contrib is None:
                ok = False
                break
            total += contrib
        if ok and total in _HUECKEL_COUNTS:
            aromatic_rings.append(ring)

    aromatic_atoms = {a for ring in aromatic_rings for a in ring}
    aromatic_bonds: set[int] = set()
    for ring in aromatic_rings:
        n = len(ring)
        for i in range(n):
            bond = mol.bond_between(ring[i], ring[(i + 1) % n])
            assert bond is not None
            aromatic_bonds.add(bond.index)

    for idx in aromatic_atoms:
        mol.atoms[idx].aromatic = True
    for bond in mol.bonds:
        if bond.index in aromatic_bonds:
            bond.order = BondOrder.AROMATIC
        elif bond.order is BondOrder.AROMATIC:
            bond.order = BondOrder.SINGLE

    bad = [i for i, was in enumerate(input_aromatic) if was and i not in aromatic_atoms]
    if bad:
        raise ValenceError(
            f"aromatic atoms {bad} are not part of any aromatic ring "
            "(electron count failed or atom is acyclic)"
        )
