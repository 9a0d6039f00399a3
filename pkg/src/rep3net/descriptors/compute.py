"""Global descriptor vector: constitutional, topological, physicochemical.

The schema is a fixed, documented ordering; vectors are only comparable
within one schema_id. All values derive from the heavy-atom graph (implicit
hydrogens enter only through counts and masses).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..chem.mol import BondOrder, Hybridization, Molecule
from .crippen import crippen_contributions
from .tpsa import tpsa

SCHEMA_ID = "rep3net-desc-v1"

SCHEMA: tuple[str, ...] = (
    "mw", "heavy_atom_count",
    "c_count", "n_count", "o_count", "s_count", "p_count",
    "f_count", "cl_count", "br_count", "i_count",
    "ring_count", "aromatic_ring_count", "largest_ring_size",
    "rotatable_bond_count", "hbd", "hba", "formal_charge_sum",
    "fraction_csp3", "wiener_index", "zagreb_m1", "zagreb_m2",
    "chi0", "chi1", "chi2", "chi3", "kappa1", "kappa2", "kappa3",
    "tpsa", "crippen_logp", "crippen_mr",
    "graph_radius", "graph_diameter", "branching_count",
    "hetero_count", "halogen_count", "aromatic_atom_count", "ring_atom_count",
    "double_bond_count", "triple_bond_count", "aromatic_bond_count",
    "total_h_count", "nhoh_count", "amide_bond_count", "balaban_j",
)

_HALOGENS = ("F", "Cl", "Br", "I")


@dataclass
class DescriptorVector:
    values: np.ndarray
    schema_id: str = SCHEMA_ID

    def as_dict(self) -> dict[str, float]:
        return dict(zip(SCHEMA, self.values.tolist()))


def _distance_rows(mol: Molecule) -> list[dict[int, int]]:
    """BFS shortest-path lengths per atom (reachable atoms only)."""
    rows = []
    for start in range(mol.num_atoms):
        dist = {start: 0}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for nbr in mol.neighbors(cur):
                if nbr not in dist:
                    dist[nbr] = dist[cur] + 1
                    queue.append(nbr)
        rows.append(dist)
    return rows


def _path_counts(mol: Molecule) -> tuple[int, int]:
    """Counts of simple paths with 2 and 3 bonds."""
    p2 = 0
    for center in range(mol.num_atoms):
        d = mol.degree(center)
        p2 += d * (d - 1) // 2
    p3 = 0
    for bond in mol.bonds:
        b, c = bond.a1, bond.a2
        for a in mol.neighbors(b):
            if a == c:
                continue
            for d_ in mol.neighbors(c):
                if d_ == b or d_ == a:
                    continue
                p3 += 1
    return p2, p3


def _chi_indices(mol: Molecule) -> tuple[float, float, float, float]:
    deg = [mol.degree(i) for i in range(mol.num_atoms)]
    chi0 = sum(1.0 / math.sqrt(d) for d in deg if d > 0)
    chi1 = sum(
        1.0 / math.sqrt(deg[b.a1] * deg[b.a2]) for b in mol.bonds
    )
    chi2 = 0.0
    for center in range(mol.num_atoms):
        nbrs = mol.neighbors(center)
        for i in range(len(nbrs)):
            for j in range(i + 1, len(nbrs)):
                chi2 += 1.0 / math.sqrt(deg[nbrs[i]] * deg[center] * deg[nbrs[j]])
    chi3 = 0.0
    for bond in mol.bonds:
        b, c = bond.a1, bond.a2
        for a in mol.neighbors(b):
            if a == c:
                continue
            for d_ in mol.neighbors(c):
                if d_ == b or d_ == a:
                    continue
                chi3 += 1.0 / math.sqrt(deg[a] * deg[b] * deg[c] * deg[d_])
    return chi0, chi1, chi2, chi3


def _kappa_indices(mol: Molecule) -> tuple[float, float, float]:
    a = mol.num_atoms
    p1 = mol.num_bonds
    p2, p3 = _path_counts(mol)
    kappa1 = a * (a - 1) ** 2 / p1**2 if p1 else 0.0
    kappa2 = (a - 1) * (a - 2) ** 2 / p2**2 if p2 else 0.0
    if p3:
        if a % 2:
            kappa3 = (a - 1) * (a - 3) ** 2 / p3**2
        else:
            kappa3 = (a - 3) * (a - 2) ** 2 / p3**2
    else:
        kappa3 = 0.0
    return kappa1, kappa2, kappa3


def _rotatable_bonds(mol: Molecule) -> int:
    triple_atoms = set()
    for bond in mol.bonds:
        if bond.order is BondOrder.TRIPLE:
            triple_atoms.update((bond.a1, bond.a2))
    count = 0
    for bond in mol.bonds:
        if bond.order is not BondOrder.SINGLE or bond.in_ring:
            continue
        if bond.a1 in triple_atoms or bond.a2 in triple_atoms:
            continue
        if mol.degree(bond.a1) >= 2 and mol.degree(bond.a2) >= 2:
            count += 1
    return count


def _amide_bonds(mol: Molecule) -> int:
    count = 0
    for bond in mol.bonds:
        if bond.order is not BondOrder.SINGLE:
            continue
        for c_idx, n_idx in ((bond.a1, bond.a2), (bond.a2, bond.a1)):
            if mol.atoms[c_idx].symbol != "C" or mol.atoms[n_idx].symbol != "N":
                continue
            has_carbonyl = any(
                b.order is BondOrder.DOUBLE
                and mol.atoms[b.other(c_idx)].symbol == "O"
                for b in mol.bonds_of(c_idx)
            )
            if has_carbonyl:
                count += 1
                break
    return count


def _balaban_j(mol: Molecule, rows: list[dict[int, int]]) -> float:
    q = mol.num_bonds
    n = mol.num_atoms
    if q == 0 or len(rows[0]) != n:
        return 0.0  # undefined for disconnected or edgeless graphs
    mu = q - n + 1
    s = [sum(r.values()) for r in rows]
    acc = 0.0
    for bond in mol.bonds:
        acc += 1.0 / math.sqrt(s[bond.a1] * s[bond.a2])
    return q / (mu + 1.0) * acc


def compute_descriptors(mol: Molecule) -> DescriptorVector:
    counts = {sym: 0 for sym in ("C", "N", "O", "S", "P", "F", "Cl", "Br", "I")}
    for atom in mol.atoms:
        if atom.symbol in counts:
            counts[atom.symbol] += 1

    rows = _distance_rows(mol)
    wiener = sum(sum(r.values()) for r in rows) // 2
    eccentricities = [max(r.values()) for r in rows] if mol.num_atoms else [0]
    connected = all(len(r) == mol.num_atoms for r in rows)
    radius = float(min(eccentricities)) if connected else 0.0
    diameter = float(max(eccentricities)) if connected else 0.0

    deg = [mol.degree(i) for i in range(mol.num_atoms)]
    zagreb_m1 = float(sum(d * d for d in deg))
    zagreb_m2 = float(sum(deg[b.a1] * deg[b.a2] for b in mol.bonds))
    chi0, chi1, chi2, chi3 = _chi_indices(mol)
    kappa1, kappa2, kappa3 = _kappa_indices(mol)

    aromatic_rings = sum(
        1
        for ring in mol.rings
        if all(mol.atoms[i].aromatic for i in ring)
    )
    carbons = [a for a in mol.atoms if a.symbol == "C"]
    sp3_carbons = sum(1 for a in carbons if a.hybridization is Hybridization.SP3)
    fraction_csp3 = sp3_carbons / len(carbons) if carbons else 0.0

    hbd = sum(1 for a in mol.atoms if a.symbol in ("N", "O") and a.total_h >= 1)
    hba = counts["N"] + counts["O"]
    logp, mr = crippen_contributions(mol)

    orders = [b.order for b in mol.bonds]
    values = np.array(
        [
            mol.molecular_weight(),
            float(mol.num_atoms),
            *(float(counts[s]) for s in ("C", "N", "O", "S", "P", "F", "Cl", "Br", "I")),
            float(len(mol.rings)),
            float(aromatic_rings),
            float(max((len(r) for r in mol.rings), default=0)),
            float(_rotatable_bonds(mol)),
            float(hbd),
            float(hba),
            float(sum(a.formal_charge for a in mol.atoms)),
            fraction_csp3,
            float(wiener),
            zagreb_m1,
            zagreb_m2,
            chi0,
            chi1,
            chi2,
            chi3,
            kappa1,
            kappa2,
            kappa3,
            tpsa(mol),
            logp,
            mr,
            radius,
            diameter,
            float(sum(1 for d in deg if d >= 3)),
            float(sum(1 for a in mol.atoms if a.symbol != "C")),
            float(sum(counts[h] for h in _HALOGENS)),
            float(sum(1 for a in mol.atoms if a.aromatic)),
            float(sum(1 for a in mol.atoms if a.in_ring)),
            float(sum(1 for o in orders if o is BondOrder.DOUBLE)),
            float(sum(1 for o in orders if o is BondOrder.TRIPLE)),
            float(sum(1 for o in orders if o is BondOrder.AROMATIC)),
            float(sum(a.total_h for a in mol.atoms)),
            float(sum(a.total_h for a in mol.atoms if a.symbol in ("N", "O"))),
            float(_amide_bonds(mol)),
            _balaban_j(mol, rows),
        ],
        dtype=np.float64,
    )
    assert values.shape == (len(SCHEMA),)
    return DescriptorVector(values=values)


def descriptor_matrix(mols) -> np.ndarray:
    """Stack descriptor vectors for an iterable of molecules, row per input."""
    return np.stack([compute_descriptors(m).values for m in mols], axis=0)
