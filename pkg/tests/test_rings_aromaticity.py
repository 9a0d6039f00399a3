"""Ring perception against networkx cycle-space oracles, aromaticity cases."""

import warnings

import pytest

from rep3net.chem import BondOrder, parse_smiles

from helpers import cycle_space_rank, load_corpus, minimum_cycle_sizes


@pytest.mark.parametrize(
    "smiles, n_rings, sizes",
    [
        ("c1ccccc1", 1, [6]),
        ("c1ccc2ccccc2c1", 2, [6, 6]),
        ("CCO", 0, []),
        ("C1CC1", 1, [3]),
        ("C1CCC2CCCCC2C1", 2, [6, 6]),
        ("C1C2CC3CC1CC(C2)C3", 3, [6, 6, 6]),
        ("C1CC2CCC1C2", 2, [5, 5]),
        ("c1ccc2cc3ccccc3cc2c1", 3, [6, 6, 6]),
        ("O=C1NS(=O)(=O)c2ccccc12", 2, [5, 6]),
        ("C1CCC2(CC1)CCCCC2", 2, [6, 6]),
    ],
)
def test_sssr_counts_and_sizes(smiles, n_rings, sizes):
    mol = parse_smiles(smiles)
    assert len(mol.rings) == n_rings
    assert sorted(len(r) for r in mol.rings) == sizes


def test_ring_count_formula_on_corpus():
    """SSSR size equals the cycle-space dimension for every corpus molecule."""
    for smiles in load_corpus():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mol = parse_smiles(smiles)
        assert len(mol.rings) == cycle_space_rank(mol), smiles


def test_sssr_sizes_match_minimum_cycle_basis():
    for smiles in load_corpus():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mol = parse_smiles(smiles)
        got = sorted(len(r) for r in mol.rings)
        assert got == minimum_cycle_sizes(mol), smiles


def test_ring_membership_flags():
    mol = parse_smiles("CC1CCCCC1")
    assert not mol.atoms[0].in_ring
    assert all(mol.atoms[i].in_ring for i in range(1, 7))
    ring_bonds = [b for b in mol.bonds if b.in_ring]
    assert len(ring_bonds) == 6


@pytest.mark.parametrize(
    "smiles, aromatic_count",
    [
        ("c1ccccc1", 6),
        ("C1=CC=CC=C1", 6),            # Kekule benzene is perceived
        ("C1=CC=CN1", 5),              # Kekule pyrrole
        ("C1=CC=CO1", 5),              # Kekule furan
        ("C1=CC=NC=C1", 6),            # Kekule pyridine
        ("C1=CC2=CC=CC=C2C=C1", 10),   # Kekule naphthalene
        ("O=C1C=CC(=O)C=C1", 0),       # quinone stays non-aromatic
        ("C1CCCCC1", 0),
        ("C1=CCC=CC1", 0),             # 1,4-cyclohexadiene: sp3 carbons block
        ("c1cc[nH]c1", 5),
        ("O=c1cc[nH]c(=O)[nH]1", 6),   # uracil, exocyclic carbonyls
        ("[cH+]1cccccc1", 7),          # tropylium
        ("[cH-]1cccc1", 5),            # cyclopentadienide
        ("[o+]1ccccc1", 6),            # pyrylium
        ("C1=CC=CC=CC=C1", 0),         # cyclooctatetraene: ring size 8 skipped
    ],
)
def test_aromatic_atom_counts(smiles, aromatic_count):
    mol = parse_smiles(smiles)
    assert sum(1 for a in mol.atoms if a.aromatic) == aromatic_count


def test_aromatic_bonds_only_between_aromatic_atoms():
    for smiles in load_corpus():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            mol = parse_smiles(smiles)
        for bond in mol.bonds:
            if bond.order is BondOrder.AROMATIC:
                assert mol.atoms[bond.a1].aromatic and mol.atoms[bond.a2].aromatic


def test_biphenyl_connector_is_single():
    mol = parse_smiles("c1ccc(cc1)-c1ccccc1")
    singles = [b for b in mol.bonds if b.order is BondOrder.SINGLE]
    assert len(singles) == 1
    assert mol.atoms[singles[0].a1].aromatic and mol.atoms[singles[0].a2].aromatic
    # same molecule without the explicit dash
    mol2 = parse_smiles("c1ccc(cc1)c1ccccc1")
    assert sum(1 for b in mol2.bonds if b.order is BondOrder.SINGLE) == 1


def test_pyridine_vs_pyrrole_nitrogen():
    pyridine_n = parse_smiles("c1ccncc1").atoms[3]
    assert pyridine_n.total_h == 0
    pyrrole_n = parse_smiles("c1cc[nH]c1").atoms[3]
    assert pyrrole_n.total_h == 1


def test_fused_heteroaromatics():
    indole = parse_smiles("c1ccc2[nH]ccc2c1")
    assert sum(1 for a in indole.atoms if a.aromatic) == 9
    purine = parse_smiles("Nc1ncnc2[nH]cnc12")
    assert sum(1 for a in purine.atoms if a.aromatic) == 9  # exocyclic N is not
