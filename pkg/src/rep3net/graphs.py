"""Molecular graph construction for the GCN pathway.

Each atom becomes a 74-dim feature row laid out as fixed blocks:

    element one-hot   43  (42 named symbols, final slot catches the rest)
    degree one-hot    11  (0..10)
    implicit valence   7  (0..6 implicit hydrogens)
    formal charge      1  (scalar)
    radical electrons  1  (scalar)
    hybridization      5  (SP, SP2, SP3, SP3D, SP3D2)
    aromatic flag      1
    total-H one-hot    5  (0..4)

The element order is pinned here; checkpoints depend on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chem.mol import Atom, Hybridization, Molecule

# fmt: off
ELEMENT_LIST = (
    "C", "N", "O", "S", "F", "Si", "P", "Cl", "Br", "Mg",
    "Na", "Ca", "Fe", "As", "Al", "I", "B", "V", "K", "Tl",
    "Yb", "Sb", "Sn", "Ag", "Pd", "Co", "Se", "Ti", "Zn", "H",
    "Li", "Ge", "Cu", "Au", "Ni", "Cd", "In", "Mn", "Zr", "Cr",
    "Pt", "Hg",
)
# fmt: on

HYBRIDIZATION_LIST = (
    Hybridization.SP,
    Hybridization.SP2,
    Hybridization.SP3,
    Hybridization.SP3D,
    Hybridization.SP3D2,
)

_N_ELEM = len(ELEMENT_LIST) + 1  # trailing catch-all slot
_N_DEGREE = 11
_N_VALENCE = 7
_N_HYB = len(HYBRIDIZATION_LIST)
_N_TOTAL_H = 5

FEATURE_WIDTH = _N_ELEM + _N_DEGREE + _N_VALENCE + 1 + 1 + _N_HYB + 1 + _N_TOTAL_H

_ELEMENT_INDEX = {sym: i for i, sym in enumerate(ELEMENT_LIST)}
_HYB_INDEX = {h: i for i, h in enumerate(HYBRIDIZATION_LIST)}


def _block_slices() -> dict:
    bounds = {
        "element": _N_ELEM,
        "degree": _N_DEGREE,
        "implicit_valence": _N_VALENCE,
        "formal_charge": 1,
        "radical_electrons": 1,
        "hybridization": _N_HYB,
        "aromatic": 1,
        "total_h": _N_TOTAL_H,
    }
    out = {}
    start = 0
    for name, width in bounds.items():
        out[name] = slice(start, start + width)
        start += width
    assert start == FEATURE_WIDTH
    return out


FEATURE_BLOCKS = _block_slices()


def atom_features(atom: Atom, degree: int) -> np.ndarray:
    row = np.zeros(FEATURE_WIDTH, dtype=np.float32)
    row[_ELEMENT_INDEX.get(atom.symbol, _N_ELEM - 1)] = 1.0

    base = _N_ELEM
    if 0 <= degree < _N_DEGREE:
        row[base + degree] = 1.0
    base += _N_DEGREE
    if 0 <= atom.implicit_h < _N_VALENCE:
        row[base + atom.implicit_h] = 1.0
    base += _N_VALENCE
    row[base] = float(atom.formal_charge)
    row[base + 1] = float(atom.num_radical_electrons)
    base += 2
    hyb = _HYB_INDEX.get(atom.hybridization)
    if hyb is not None:
        row[base + hyb] = 1.0
    base += _N_HYB
    row[base] = 1.0 if atom.aromatic else 0.0
    base += 1
    if 0 <= atom.total_h < _N_TOTAL_H:
        row[base + atom.total_h] = 1.0
    return row


@dataclass
class MolecularGraph:
    n: int
    adjacency: list  # undirected (u, v) pairs with u < v, no duplicates
    node_features: np.ndarray  # n x 74, float32
    degrees: np.ndarray  # per-node int64

    def __post_init__(self) -> None:
        assert self.node_features.shape == (self.n, FEATURE_WIDTH)
        for u, v in self.adjacency:
            assert u != v, "self-loops are not allowed"


def build_graph(mol: Molecule) -> MolecularGraph:
    n = mol.num_atoms
    degrees = np.array([mol.degree(i) for i in range(n)], dtype=np.int64)
    features = np.stack(
        [atom_features(a, int(degrees[a.index])) for a in mol.atoms]
    ) if n else np.zeros((0, FEATURE_WIDTH), dtype=np.float32)
    adjacency = sorted(
        (min(b.a1, b.a2), max(b.a1, b.a2)) for b in mol.bonds
    )
    return MolecularGraph(
        n=n, adjacency=adjacency, node_features=features, degrees=degrees
    )
