"""Wildman-Crippen LogP and molar refractivity.

Atom classes follow the published contribution table; hydrogens are
classified from the heavy atom carrying them. Classes whose refractivity
was not published contribute zero to MR.
"""

from __future__ import annotations

from ..chem.mol import Atom, BondOrder, Molecule

# class -> (logp, mr)
_PARAMS: dict[str, tuple[float, float]] = {
    "C1": (0.1441, 2.503), "C2": (0.0, 2.433), "C3": (-0.2035, 2.753),
    "C4": (-0.2051, 2.731), "C5": (-0.2783, 5.007), "C6": (0.1551, 3.513),
    "C7": (0.00170, 3.888), "C8": (0.08452, 2.464), "C9": (-0.1444, 2.412),
    "C10": (-0.0516, 2.488), "C11": (0.1193, 2.582), "C12": (-0.0967, 2.576),
    "C13": (-0.5443, 4.041), "C14": (0.0, 3.257), "C15": (0.245, 3.564),
    "C16": (0.198, 3.180), "C17": (0.0, 3.104), "C18": (0.1581, 3.350),
    "C19": (0.2955, 4.346), "C20": (0.2713, 3.904), "C21": (0.1360, 3.509),
    "C22": (0.4619, 4.067), "C23": (0.5437, 3.853), "C24": (0.1893, 2.673),
    "C25": (-0.8186, 3.135), "C26": (0.2640, 4.305), "C27": (0.2148, 2.693),
    "CS": (0.08129, 3.243),
    "H1": (0.1230, 1.057), "H2": (-0.2677, 1.395), "H3": (0.2142, 0.9627),
    "H4": (0.2980, 1.805), "HS": (0.1125, 1.112),
    "N1": (-1.0190, 2.262), "N2": (-0.7096, 2.173), "N3": (-1.0270, 2.827),
    "N4": (-0.5188, 3.000), "N5": (0.08387, 1.757), "N6": (0.1836, 2.428),
    "N7": (-0.3187, 1.839), "N8": (-0.4458, 2.819), "N9": (0.01508, 1.725),
    "N10": (-1.950, 0.0), "N11": (-0.3239, 2.202), "N12": (-1.119, 0.0),
    "N13": (-0.3396, 0.2604), "N14": (0.2887, 3.359), "NS": (-0.4806, 2.134),
    "O1": (0.1552, 1.080), "O2": (-0.2893, 0.8238), "O3": (-0.0684, 1.085),
    "O4": (-0.4195, 1.182), "O5": (0.0335, 3.367), "O6": (-0.3339, 0.7774),
    "O7": (-1.189, 0.0), "O8": (0.1788, 3.135), "O9": (-0.1526, 0.0),
    "O10": (0.1129, 0.2215), "O11": (0.4833, 0.389), "O12": (-1.326, 0.0),
    "OS": (-0.1188, 0.6865),
    "F": (0.4202, 1.108), "Cl": (0.6895, 5.853), "Br": (0.8456, 8.927),
    "I": (0.8857, 14.02), "HalA": (-2.996, 0.0),
    "P": (0.8612, 6.920),
    "S1": (0.6482, 7.591), "S2": (-0.0024, 7.365), "S3": (0.6237, 6.691),
    "Me1": (-0.3808, 5.754), "Me2": (-0.0025, 0.0),
}

_HALOGENS = ("F", "Cl", "Br", "I")
# metals and semimetals binned into the two catch-all metal classes
_ME1 = {"Li", "Na", "K", "Rb", "Cs", "Mg", "Ca", "Sr", "Ba", "Be", "Al",
        "Si", "Ge", "As", "Se", "Sn", "Te", "Pb", "B"}


def _neighbor_atoms(mol: Molecule, idx: int) -> list[Atom]:
    return [mol.atoms[n] for n in mol.neighbors(idx)]


def _has_aliphatic_hetero(nbrs: list[Atom]) -> bool:
    return any(n.symbol not in ("C", "H") and not n.aromatic for n in nbrs)


def _carbon_class(mol: Molecule, atom: Atom) -> str:
    idx = atom.index
    nbrs = _neighbor_atoms(mol, idx)
    bonds = list(mol.bonds_of(idx))
    if atom.aromatic:
        if atom.total_h >= 1:
            return "C18"
        if any(
            b.order is BondOrder.DOUBLE
            and mol.atoms[b.other(idx)].symbol in ("C", "N", "O")
            for b in bonds
        ):
            return "C25"
        subst = [
            mol.atoms[b.other(idx)]
            for b in bonds
            if b.order is not BondOrder.AROMATIC
        ]
        if not subst:
            return "C19"  # fusion carbon, all three bonds aromatic
        nbr = subst[0]
        if nbr.symbol == "F":
            return "C14"
        if nbr.symbol == "Cl":
            return "C15"
        if nbr.symbol == "Br":
            return "C16"
        if nbr.symbol == "I":
            return "C17"
        if nbr.aromatic:
            return "C20"
        if nbr.symbol == "C":
            return "C21"
        if nbr.symbol == "N":
            return "C22"
        if nbr.symbol == "O":
            return "C23"
        if nbr.symbol == "S":
            return "C24"
        return "C13"
    doubles = [b for b in bonds if b.order is BondOrder.DOUBLE]
    if any(b.order is BondOrder.TRIPLE for b in bonds):
        return "C7"
    if doubles:
        partners = [mol.atoms[b.other(idx)] for b in doubles]
        if any(p.symbol != "C" and not p.aromatic for p in partners):
            return "C5"
        if any(n.aromatic for n in nbrs):
            return "C26"
        return "C6"
    # sp3
    h = atom.total_h
    if _has_aliphatic_hetero(nbrs):
        return "C3" if h >= 2 else "C4"
    if any(n.aromatic for n in nbrs):
        if h >= 3:
            arom = next(n for n in nbrs if n.aromatic)
            return "C8" if arom.symbol == "C" else "C9"
        if h == 2:
            return "C10"
        if h == 1:
            return "C11"
        return "C12"
    if all(n.symbol == "C" for n in nbrs):
        return "C1" if h >= 2 else "C2"
    return "CS"


def _nitrogen_class(mol: Molecule, atom: Atom) -> str:
    idx = atom.index
    nbrs = _neighbor_atoms(mol, idx)
    bonds = list(mol.bonds_of(idx))
    h = atom.total_h
    if atom.formal_charge > 0:
        if atom.aromatic:
            return "N12"
        if h >= 1 and not any(b.order is BondOrder.DOUBLE for b in bonds):
            return "N10"
        if any(b.order is BondOrder.DOUBLE for b in bonds):
            return "N14"
        return "N13"
    if atom.formal_charge < 0:
        return "NS"
    if atom.aromatic:
        return "N11"
    if any(b.order is BondOrder.TRIPLE for b in bonds):
        return "N9"
    if any(b.order is BondOrder.DOUBLE for b in bonds):
        return "N5" if h >= 1 else "N6"
    has_aromatic_nbr = any(n.aromatic for n in nbrs)
    if h >= 2:
        return "N3" if has_aromatic_nbr else "N1"
    if h == 1:
        return "N4" if has_aromatic_nbr else "N2"
    if len(nbrs) >= 3:
        return "N8" if has_aromatic_nbr else "N7"
    return "NS"


def _oxygen_class(mol: Molecule, atom: Atom) -> str:
    idx = atom.index
    nbrs = _neighbor_atoms(mol, idx)
    bonds = list(mol.bonds_of(idx))
    if atom.aromatic:
        return "O1"
    if atom.total_h >= 1:
        return "O2"
    if atom.formal_charge < 0:
        if any(n.symbol == "N" for n in nbrs):
            return "O5"
        if any(n.symbol == "S" for n in nbrs):
            return "O6"
        for n in nbrs:
            if n.symbol == "C" and any(
                b.order is BondOrder.DOUBLE
                and mol.atoms[b.other(n.index)].symbol == "O"
                for b in mol.bonds_of(n.index)
            ):
                return "O12"  # carboxylate
        return "O7"
    doubles = [b for b in bonds if b.order is BondOrder.DOUBLE]
    if doubles:
        partner = mol.atoms[doubles[0].other(idx)]
        if partner.symbol in ("N", "S"):
            return "O5" if partner.symbol == "N" else "O6"
        if partner.aromatic:
            return "O8"
        # carbonyl: classify by the carbon's other substituents
        others = [
            mol.atoms[n]
            for n in mol.neighbors(partner.index)
            if n != idx
        ]
        if any(o.symbol in ("N", "S") for o in others):
            return "O11"
        if any(o.aromatic for o in others):
            return "O10"
        return "O9"
    if len(nbrs) == 2:
        return "O4" if any(n.aromatic for n in nbrs) else "O3"
    return "OS"


def _classify(mol: Molecule, atom: Atom) -> str:
    sym = atom.symbol
    if sym == "C":
        return _carbon_class(mol, atom)
    if sym == "N":
        return _nitrogen_class(mol, atom)
    if sym == "O":
        return _oxygen_class(mol, atom)
    if sym == "S":
        if atom.formal_charge != 0:
            return "S2"
        return "S3" if atom.aromatic else "S1"
    if sym == "P":
        return "P"
    if sym in _HALOGENS:
        return "HalA" if atom.formal_charge < 0 else sym
    if sym == "H":
        return _hydrogen_class_for_heavy(mol, atom)
    if sym in _ME1:
        return "Me1"
    return "Me2"


def _hydrogen_class_for_heavy(mol: Molecule, heavy: Atom) -> str:
    """Class of hydrogens sitting on the given heavy atom."""
    sym = heavy.symbol
    if sym == "C" or sym == "H":
        return "H1"
    if sym == "N":
        return "H3"
    if sym == "O":
        nbrs = _neighbor_atoms(mol, heavy.index)
        if any(n.symbol == "N" for n in nbrs):
            return "H3"  # hydroxylamine
        if any(n.symbol in ("O", "S") for n in nbrs):
            return "H4"  # peroxide / thio analog
        for n in nbrs:
            if n.symbol == "C" and any(
                b.order is BondOrder.DOUBLE
                and mol.atoms[b.other(n.index)].symbol in ("C", "N", "O", "S")
                for b in mol.bonds_of(n.index)
            ):
                return "H4"  # acid or enol hydroxyl
        return "H2"
    return "HS"


def crippen_contributions(mol: Molecule) -> tuple[float, float]:
    """(logp, mr) summed over heavy atoms and their attached hydrogens."""
    logp = 0.0
    mr = 0.0
    for atom in mol.atoms:
        cls = _classify(mol, atom)
        p = _PARAMS[cls]
        logp += p[0]
        mr += p[1]
        if atom.total_h and atom.symbol != "H":
            hp = _PARAMS[_hydrogen_class_for_heavy(mol, atom)]
            logp += atom.total_h * hp[0]
            mr += atom.total_h * hp[1]
    return logp, mr


def crippen_logp(mol: Molecule) -> float:
    return crippen_contributions(mol)[0]


def crippen_mr(mol: Molecule) -> float:
    return crippen_contributions(mol)[1]
