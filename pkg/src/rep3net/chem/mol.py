"""Molecular graph types.

A Molecule is a plain container of atoms and bonds plus derived lookup
tables. It is mutable during construction (the parser and perception passes
fill fields in) and treated as frozen afterwards.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .elements import atomic_mass, atomic_number


class BondOrder(enum.Enum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def order_value(self) -> float:
        """Numeric bond order used in valence sums (aromatic counts 1.5)."""
        if self is BondOrder.AROMATIC:
            return 1.5
        return float(self.value)


class Hybridization(enum.Enum):
    SP = "sp"
    SP2 = "sp2"
    SP3 = "sp3"
    SP3D = "sp3d"
    SP3D2 = "sp3d2"
    OTHER = "other"


@dataclass
class Atom:
    symbol: str                      # canonical case, e.g. "C" even if parsed as "c"
    index: int
    formal_charge: int = 0
    explicit_h: Optional[int] = None  # from brackets; None means infer
    isotope: int = 0                  # 0 means unspecified
    aromatic: bool = False
    implicit_h: int = 0
    num_radical_electrons: int = 0
    hybridization: Hybridization = Hybridization.SP3
    in_ring: bool = False

    @property
    def total_h(self) -> int:
        if self.explicit_h is not None:
            return self.explicit_h
        return self.implicit_h

    @property
    def atomic_number(self) -> int:
        return atomic_number(self.symbol)

    @property
    def mass(self) -> float:
        return atomic_mass(self.symbol)


@dataclass
class Bond:
    a1: int
    a2: int
    order: BondOrder
    index: int
    in_ring: bool = False

    def other(self, atom_index: int) -> int:
        if atom_index == self.a1:
            return self.a2
        if atom_index == self.a2:
            return self.a1
        raise ValueError(f"atom {atom_index} not part of bond {self.index}")

    def key(self) -> tuple[int, int]:
        return (self.a1, self.a2) if self.a1 < self.a2 else (self.a2, self.a1)


@dataclass
class Molecule:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)
    rings: list[list[int]] = field(default_factory=list)  # SSSR atom index cycles
    _neighbors: Optional[list[list[int]]] = field(default=None, repr=False)
    _bond_lookup: Optional[dict[tuple[int, int], Bond]] = field(default=None, repr=False)

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)

    def invalidate_caches(self) -> None:
        self._neighbors = None
        self._bond_lookup = None

    def neighbors(self, atom_index: int) -> list[int]:
        if self._neighbors is None:
            table: list[list[int]] = [[] for _ in self.atoms]
            for bond in self.bonds:
                table[bond.a1].append(bond.a2)
                table[bond.a2].append(bond.a1)
            self._neighbors = table
        return self._neighbors[atom_index]

    def bond_between(self, a1: int, a2: int) -> Optional[Bond]:
        if self._bond_lookup is None:
            self._bond_lookup = {b.key(): b for b in self.bonds}
        key = (a1, a2) if a1 < a2 else (a2, a1)
        return self._bond_lookup.get(key)

    def bonds_of(self, atom_index: int) -> Iterator[Bond]:
        for nbr in self.neighbors(atom_index):
            bond = self.bond_between(atom_index, nbr)
            assert bond is not None
            yield bond

    def degree(self, atom_index: int) -> int:
        """Heavy-atom degree (explicit connections in the graph)."""
        return len(self.neighbors(atom_index))

    def bond_order_sum(self, atom_index: int) -> float:
        return sum(b.order.order_value for b in self.bonds_of(atom_index))

    def molecular_weight(self) -> float:
        total = 0.0
        for atom in self.atoms:
            total += atom.mass
            total += atom.total_h * atomic_mass("H")
        return total

    def molecular_formula(self) -> str:
        """Hill order: C first, H second, rest alphabetical. Charge ignored."""
        counts: dict[str, int] = {}
        h_count = 0
        for atom in self.atoms:
            counts[atom.symbol] = counts.get(atom.symbol, 0) + 1
            h_count += atom.total_h
        if h_count:
            counts["H"] = counts.get("H", 0) + h_count
        parts: list[str] = []
        ordered: list[str] = []
        if "C" in counts:
            ordered.append("C")
            if "H" in counts:
                ordered.append("H")
            ordered.extend(sorted(s for s in counts if s not in ("C", "H")))
        else:
            ordered.extend(sorted(counts))
        for symbol in ordered:
            n = counts[symbol]
            parts.append(symbol if n == 1 else f"{symbol}{n}")
        return "".join(parts)

    def components(self) -> list[list[int]]:
        """Connected components as sorted atom index lists, discovery order."""
        seen = [False] * self.num_atoms
        out: list[list[int]] = []
        for start in range(self.num_atoms):
            if seen[start]:
                continue
            stack = [start]
            seen[start] = True
            comp = []
            while stack:
                cur = stack.pop()
                comp.append(cur)
                for nbr in self.neighbors(cur):
                    if not seen[nbr]:
                        seen[nbr] = True
                        stack.append(nbr)
            out.append(sorted(comp))
        return out


def permute_atoms(mol: Molecule, perm: Sequence[int]) -> Molecule:
    """Return a copy of mol with atom i moved to position perm[i].

    perm must be a permutation of range(num_atoms). Used by tests to check
    canonicalization is invariant under atom relabeling.
    """
    n = mol.num_atoms
    if sorted(perm) != list(range(n)):
        raise ValueError("perm is not a permutation of atom indices")
    new_atoms: list[Optional[Atom]] = [None] * n
    for old_index, atom in enumerate(mol.atoms):
        new_index = perm[old_index]
        new_atoms[new_index] = Atom(
            symbol=atom.symbol,
            index=new_index,
            formal_charge=atom.formal_charge,
            explicit_h=atom.explicit_h,
            isotope=atom.isotope,
            aromatic=atom.aromatic,
            implicit_h=atom.implicit_h,
            num_radical_electrons=atom.num_radical_electrons,
            hybridization=atom.hybridization,
            in_ring=atom.in_ring,
        )
    new_bonds = []
    for i, bond in enumerate(mol.bonds):
        new_bonds.append(
            Bond(a1=perm[bond.a1], a2=perm[bond.a2], order=bond.order, index=i,
                 in_ring=bond.in_ring)
        )
    new_rings = [[perm[a] for a in ring] for ring in mol.rings]
    out = Molecule(atoms=[a for a in new_atoms if a is not None], bonds=new_bonds,
                   rings=new_rings)
    return out
