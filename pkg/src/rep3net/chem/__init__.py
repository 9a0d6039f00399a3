"""SMILES parsing, ring/aromaticity perception and canonicalization."""

from .canon import canonical_ranks, canonical_smiles, randomized_smiles
from .mol import Atom, Bond, BondOrder, Hybridization, Molecule, permute_atoms
from .rings import perceive_rings
from .smiles import parse_smiles

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "Hybridization",
    "Molecule",
    "canonical_ranks",
    "canonical_smiles",
    "parse_smiles",
    "perceive_rings",
    "permute_atoms",
    "randomized_smiles",
]
