"""Element data: atomic numbers, masses, valence models.

Masses are IUPAC 2021 abridged standard atomic weights. Valence lists hold the
allowed valences in increasing order; implicit hydrogen assignment picks the
smallest one that covers the explicit bond order sum.
"""

from __future__ import annotations

ATOMIC_NUMBERS: dict[str, int] = {
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8,
    "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13, "Si": 14, "P": 15,
    "S": 16, "Cl": 17, "Ar": 18, "K": 19, "Ca": 20, "Sc": 21, "Ti": 22,
    "V": 23, "Cr": 24, "Mn": 25, "Fe": 26, "Co": 27, "Ni": 28, "Cu": 29,
    "Zn": 30, "Ga": 31, "Ge": 32, "As": 33, "Se": 34, "Br": 35, "Kr": 36,
    "Rb": 37, "Sr": 38, "Y": 39, "Zr": 40, "Nb": 41, "Mo": 42, "Tc": 43,
    "Ru": 44, "Rh": 45, "Pd": 46, "Ag": 47, "Cd": 48, "In": 49, "Sn": 50,
    "Sb": 51, "Te": 52, "I": 53, "Xe": 54, "Cs": 55, "Ba": 56, "La": 57,
    "Hf": 72, "Ta": 73, "W": 74, "Re": 75, "Os": 76, "Ir": 77, "Pt": 78,
    "Au": 79, "Hg": 80, "Tl": 81, "Pb": 82, "Bi": 83,
}

ATOMIC_MASSES: dict[str, float] = {
    "H": 1.008, "He": 4.003, "Li": 6.94, "Be": 9.012, "B": 10.81,
    "C": 12.011, "N": 14.007, "O": 15.999, "F": 18.998, "Ne": 20.180,
    "Na": 22.990, "Mg": 24.305, "Al": 26.982, "Si": 28.085, "P": 30.974,
    "S": 32.06, "Cl": 35.45, "Ar": 39.95, "K": 39.098, "Ca": 40.078,
    "Sc": 44.956, "Ti": 47.867, "V": 50.942, "Cr": 51.996, "Mn": 54.938,
    "Fe": 55.845, "Co": 58.933, "Ni": 58.693, "Cu": 63.546, "Zn": 65.38,
    "Ga": 69.723, "Ge": 72.630, "As": 74.922, "Se": 78.971, "Br": 79.904,
    "Kr": 83.798, "Rb": 85.468, "Sr": 87.62, "Y": 88.906, "Zr": 91.224,
    "Nb": 92.906, "Mo": 95.95, "Tc": 97.0, "Ru": 101.07, "Rh": 102.91,
    "Pd": 106.42, "Ag": 107.87, "Cd": 112.41, "In": 114.82, "Sn": 118.71,
    "Sb": 121.76, "Te": 127.60, "I": 126.90, "Xe": 131.29, "Cs": 132.91,
    "Ba": 137.33, "La": 138.91, "Hf": 178.49, "Ta": 180.95, "W": 183.84,
    "Re": 186.21, "Os": 190.23, "Ir": 192.22, "Pt": 195.08, "Au": 196.97,
    "Hg": 200.59, "Tl": 204.38, "Pb": 207.2, "Bi": 208.98,
}

# Allowed valences for implicit hydrogen inference. Only elements in the
# organic subset ever receive implicit hydrogens; everything else must spell
# its hydrogens out in brackets.
DEFAULT_VALENCES: dict[str, list[int]] = {
    "B": [3],
    "C": [4],
    "N": [3, 5],
    "O": [2],
    "P": [3, 5],
    "S": [2, 4, 6],
    "F": [1],
    "Cl": [1],
    "Br": [1],
    "I": [1],
}

# Bare (unbracketed) element tokens allowed by the grammar.
ORGANIC_SUBSET = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}

# Elements that may appear lowercase (aromatic) in input.
AROMATIC_ELEMENTS = {"b", "c", "n", "o", "p", "s", "se", "as", "te"}

# Two-letter symbols must be checked before one-letter ones when tokenizing.
TWO_LETTER_ORGANIC = {"Cl", "Br"}


def atomic_number(symbol: str) -> int:
    try:
        return ATOMIC_NUMBERS[symbol]
    except KeyError:
        raise KeyError(f"unknown element symbol: {symbol!r}") from None


def atomic_mass(symbol: str) -> float:
    try:
        return ATOMIC_MASSES[symbol]
    except KeyError:
        raise KeyError(f"no atomic mass for element: {symbol!r}") from None


def allowed_valences(symbol: str, formal_charge: int = 0) -> list[int]:
    """Valence states usable for implicit H assignment, adjusted for charge.

    Cations of B and C lose a bonding slot per positive charge; N, P, O and S
    cations gain one (ammonium N has valence 4). Anions lose one per negative
    charge. Results are clamped at zero.
    """
    base = DEFAULT_VALENCES.get(symbol)
    if base is None:
        return []
    if formal_charge == 0:
        return list(base)
    if formal_charge > 0:
        if symbol in ("B", "C"):
            shift = -formal_charge
        else:
            shift = formal_charge
    else:
        shift = formal_charge  # anions: one fewer bond per negative charge
    return [max(0, v + shift) for v in base]
