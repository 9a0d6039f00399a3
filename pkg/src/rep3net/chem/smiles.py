"""SMILES reader.

Implements the organic subset plus bracket atoms with isotope, charge and
explicit hydrogen counts, ring closures (including %nn), branches, dots and
aromatic lowercase forms. Stereo markers (/ \\ @ @@) parse but are dropped
with a warning. Wildcards and quadruple bonds are rejected.

Pipeline: tokenize -> build graph -> fold explicit H atoms -> keep largest
fragment -> validate graph -> SSSR -> implicit hydrogens -> aromaticity ->
valence check -> hybridization.
"""

from __future__ import annotations

import logging
import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Optional

from ..exceptions import SmilesSyntaxError, UnsupportedFeatureError, ValenceError
from .aromaticity import perceive_aromaticity
from .elements import (
    ATOMIC_NUMBERS,
    AROMATIC_ELEMENTS,
    ORGANIC_SUBSET,
    allowed_valences,
)
from .mol import Atom, Bond, BondOrder, Hybridization, Molecule
from .rings import perceive_rings

logger = logging.getLogger(__name__)

_BOND_CHARS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
}

_BRACKET_RE = re.compile(
    r"""^(?P<isotope>\d+)?
         (?P<symbol>[A-Z][a-z]?|[a-z]{1,2})
         (?P<chiral>@TH[12]|@AL[12]|@SP[1-3]|@@|@)?
         (?P<hcount>H\d*)?
         (?P<charge>\+\++|--+|[+-]\d*|)
         (?::(?P<atomclass>\d+))?$""",
    re.VERBOSE,
)


@dataclass
class _ParsedAtom:
    symbol: str
    aromatic: bool
    formal_charge: int = 0
    explicit_h: Optional[int] = None
    isotope: int = 0
    folded_h: int = 0  # explicit [H] neighbors folded onto this atom
    from_bracket: bool = False


@dataclass
class _ParseState:
    atoms: list[_ParsedAtom] = field(default_factory=list)
    bonds: list[tuple[int, int, Optional[BondOrder]]] = field(default_factory=list)
    prev: Optional[int] = None
    pending_bond: Optional[BondOrder] = None
    branch_stack: list[int] = field(default_factory=list)
    ring_open: dict[int, tuple[int, Optional[BondOrder]]] = field(default_factory=dict)
    saw_stereo: bool = False


def _parse_charge(spec: str) -> int:
    if not spec:
        return 0
    if spec[0] == "+":
        return len(spec) if set(spec) == {"+"} else int(spec[1:] or 1)
    return -len(spec) if set(spec) == {"-"} else -int(spec[1:] or 1)


def _parse_bracket(body: str, pos: int) -> tuple[_ParsedAtom, bool]:
    if "*" in body:
        raise UnsupportedFeatureError("wildcard atoms are not supported")
    m = _BRACKET_RE.match(body)
    if m is None:
        raise SmilesSyntaxError(f"malformed bracket atom [{body}] at position {pos}")
    raw = m.group("symbol")
    aromatic = raw[0].islower()
    symbol = raw.capitalize() if aromatic else raw
    if aromatic and raw not in AROMATIC_ELEMENTS:
        raise SmilesSyntaxError(f"element {raw!r} cannot be aromatic")
    if symbol not in ATOMIC_NUMBERS:
        raise UnsupportedFeatureError(f"unknown element {symbol!r} in bracket atom")
    hspec = m.group("hcount")
    if hspec is None:
        explicit_h = 0
    elif hspec == "H":
        explicit_h = 1
    else:
        explicit_h = int(hspec[1:])
    isotope = int(m.group("isotope")) if m.group("isotope") else 0
    atom = _ParsedAtom(
        symbol=symbol,
        aromatic=aromatic,
        formal_charge=_parse_charge(m.group("charge")),
        explicit_h=explicit_h,
        isotope=isotope,
        from_bracket=True,
    )
    return atom, m.group("chiral") is not None


def _add_atom(state: _ParseState, atom: _ParsedAtom) -> None:
    index = len(state.atoms)
    state.atoms.append(atom)
    if state.prev is not None:
        state.bonds.append((state.prev, index, state.pending_bond))
    elif state.pending_bond is not None:
        raise SmilesSyntaxError("bond symbol with no preceding atom")
    state.pending_bond = None
    state.prev = index


def _close_ring(state: _ParseState, digit: int, pos: int) -> None:
    if digit in state.ring_open:
        other, open_bond = state.ring_open.pop(digit)
        if state.prev is None:
            raise SmilesSyntaxError(f"ring closure {digit} with no current atom")
        if other == state.prev:
            raise SmilesSyntaxError(f"ring bond {digit} closes onto its own atom")
        close_bond = state.pending_bond
        if open_bond is not None and close_bond is not None and open_bond != close_bond:
            raise SmilesSyntaxError(
                f"conflicting bond orders on ring closure {digit} at position {pos}"
            )
        state.bonds.append((other, state.prev, open_bond or close_bond))
        state.pending_bond = None
    else:
        if state.prev is None:
            raise SmilesSyntaxError(f"ring opening {digit} with no current atom")
        state.ring_open[digit] = (state.prev, state.pending_bond)
        state.pending_bond = None


def _tokenize_and_build(text: str) -> _ParseState:
    state = _ParseState()
    i = 0
    n = len(text)
    branch_open = False  # '(' seen with no atom inside yet
    while i < n:
        ch = text[i]
        if ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise SmilesSyntaxError(f"unmatched '[' at position {i}")
            atom, had_stereo = _parse_bracket(text[i + 1 : end], i)
            state.saw_stereo = state.saw_stereo or had_stereo
            _add_atom(state, atom)
            branch_open = False
            i = end + 1
        elif ch in _BOND_CHARS:
            if state.pending_bond is not None:
                raise SmilesSyntaxError(f"two consecutive bond symbols at position {i}")
            state.pending_bond = _BOND_CHARS[ch]
            i += 1
        elif ch in "/\\":
            state.saw_stereo = True
            if state.pending_bond is None:
                state.pending_bond = BondOrder.SINGLE
            i += 1
        elif ch == "$":
            raise UnsupportedFeatureError("quadruple bonds are not supported")
        elif ch == "*":
            raise UnsupportedFeatureError("wildcard atoms are not supported")
        elif ch == "(":
            if state.prev is None:
                raise SmilesSyntaxError(f"branch opened before any atom at position {i}")
            if state.pending_bond is not None:
                raise SmilesSyntaxError(f"bond symbol before '(' at position {i}")
            if branch_open:
                raise SmilesSyntaxError(f"empty branch prefix at position {i}")
            state.branch_stack.append(state.prev)
            branch_open = True
            i += 1
        elif ch == ")":
            if not state.branch_stack:
                raise SmilesSyntaxError(f"unmatched ')' at position {i}")
            if state.pending_bond is not None:
                raise SmilesSyntaxError(f"dangling bond symbol before ')' at position {i}")
            if branch_open:
                raise SmilesSyntaxError(f"empty branch at position {i}")
            state.prev = state.branch_stack.pop()
            i += 1
        elif ch == ".":
            if state.pending_bond is not None:
                raise SmilesSyntaxError(f"bond symbol before '.' at position {i}")
            if state.branch_stack:
                raise SmilesSyntaxError(f"'.' inside a branch at position {i}")
            state.prev = None
            i += 1
        elif ch.isdigit():
            _close_ring(state, int(ch), i)
            i += 1
        elif ch == "%":
            if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                raise SmilesSyntaxError(f"malformed %nn ring closure at position {i}")
            _close_ring(state, int(text[i + 1 : i + 3]), i)
            i += 3
        elif ch.isspace():
            break  # trailing title/whitespace ends the SMILES proper
        else:
            # organic subset atom, possibly two letters
            two = text[i : i + 2]
            if two in ("Cl", "Br"):
                _add_atom(state, _ParsedAtom(symbol=two, aromatic=False))
                i += 2
            elif ch in "BCNOPSFI":
                _add_atom(state, _ParsedAtom(symbol=ch, aromatic=False))
                i += 1
            elif ch in "bcnops":
                _add_atom(state, _ParsedAtom(symbol=ch.upper(), aromatic=True))
                i += 1
            else:
                raise SmilesSyntaxError(f"unexpected character {ch!r} at position {i}")
            branch_open = False
    if state.branch_stack:
        raise SmilesSyntaxError("unclosed branch: missing ')'")
    if state.ring_open:
        digits = ", ".join(str(d) for d in sorted(state.ring_open))
        raise SmilesSyntaxError(f"unclosed ring bond(s): {digits}")
    if state.pending_bond is not None:
        raise SmilesSyntaxError("dangling bond symbol at end of input")
    if not state.atoms:
        raise SmilesSyntaxError("no atoms in SMILES input")
    return state


def _fold_hydrogens(state: _ParseState) -> None:
    """Merge neutral explicit-H atoms into their single heavy neighbor."""
    adjacency: dict[int, list[tuple[int, Optional[BondOrder], int]]] = {}
    for bi, (a1, a2, order) in enumerate(state.bonds):
        adjacency.setdefault(a1, []).append((a2, order, bi))
        adjacency.setdefault(a2, []).append((a1, order, bi))

    fold: dict[int, int] = {}  # H atom index -> heavy neighbor index
    for idx, atom in enumerate(state.atoms):
        if atom.symbol != "H" or atom.formal_charge != 0:
            continue
        nbrs = adjacency.get(idx, [])
        if len(nbrs) != 1:
            continue
        nbr, order, _ = nbrs[0]
        if order not in (None, BondOrder.SINGLE):
            raise ValenceError("explicit hydrogen with non-single bond")
        if state.atoms[nbr].symbol == "H":
            continue  # molecular hydrogen: keep both atoms
        if atom.explicit_h:
            raise ValenceError("hydrogen atom with its own hydrogen count")
        if atom.isotope:
            warnings.warn("isotope label on explicit hydrogen discarded", stacklevel=3)
        fold[idx] = nbr

    if not fold:
        return
    for heavy in fold.values():
        state.atoms[heavy].folded_h += 1
    remap: dict[int, int] = {}
    new_atoms: list[_ParsedAtom] = []
    for idx, atom in enumerate(state.atoms):
        if idx in fold:
            continue
        remap[idx] = len(new_atoms)
        new_atoms.append(atom)
    new_bonds = []
    for a1, a2, order in state.bonds:
        if a1 in fold or a2 in fold:
            continue
        new_bonds.append((remap[a1], remap[a2], order))
    state.atoms = new_atoms
    state.bonds = new_bonds


def _build_molecule(state: _ParseState) -> tuple[Molecule, list[int]]:
    mol = Molecule()
    for idx, pa in enumerate(state.atoms):
        mol.atoms.append(
            Atom(
                symbol=pa.symbol,
                index=idx,
                formal_charge=pa.formal_charge,
                explicit_h=pa.explicit_h if pa.from_bracket else None,
                isotope=pa.isotope,
                aromatic=pa.aromatic,
            )
        )
    seen_edges: set[tuple[int, int]] = set()
    for a1, a2, order in state.bonds:
        if a1 == a2:
            raise SmilesSyntaxError("self-bond in input")
        key = (a1, a2) if a1 < a2 else (a2, a1)
        if key in seen_edges:
            raise SmilesSyntaxError(f"duplicate bond between atoms {key[0]} and {key[1]}")
        seen_edges.add(key)
        if order is None:
            both_aromatic = state.atoms[a1].aromatic and state.atoms[a2].aromatic
            order = BondOrder.AROMATIC if both_aromatic else BondOrder.SINGLE
        mol.bonds.append(Bond(a1=a1, a2=a2, order=order, index=len(mol.bonds)))
    return mol, [pa.folded_h for pa in state.atoms]


def _keep_largest_fragment(
    mol: Molecule, folded: list[int], text: str
) -> tuple[Molecule, list[int]]:
    comps = mol.components()
    if len(comps) <= 1:
        return mol, folded
    comps.sort(key=lambda c: (-len(c), c[0]))
    keep = set(comps[0])
    logger.info(
        "multi-fragment SMILES %r: keeping largest fragment (%d of %d atoms)",
        text, len(keep), mol.num_atoms,
    )
    remap = {}
    new = Molecule()
    new_folded = []
    for idx in sorted(keep):
        atom = mol.atoms[idx]
        remap[idx] = len(new.atoms)
        atom.index = len(new.atoms)
        new.atoms.append(atom)
        new_folded.append(folded[idx])
    for bond in mol.bonds:
        if bond.a1 in keep and bond.a2 in keep:
            new.bonds.append(
                Bond(a1=remap[bond.a1], a2=remap[bond.a2], order=bond.order,
                     index=len(new.bonds))
            )
    return new, new_folded


def _assign_implicit_hydrogens(mol: Molecule, folded: list[int]) -> None:
    for atom in mol.atoms:
        idx = atom.index
        extra = folded[idx]
        if atom.explicit_h is not None:
            # bracket atom: hydrogen count is whatever was written plus folds
            atom.explicit_h += extra
            atom.implicit_h = 0
            _assign_radicals(mol, atom)
            continue
        sigma = mol.degree(idx) + extra
        if atom.aromatic:
            # one valence slot is consumed by the aromatic pi system
            vals = allowed_valences(atom.symbol, atom.formal_charge)
            base = vals[0] if vals else 0
            atom.implicit_h = max(0, base - 1 - sigma) + extra
            continue
        order_sum = mol.bond_order_sum(idx) + extra
        needed = math.ceil(order_sum - 1e-9)
        vals = allowed_valences(atom.symbol, atom.formal_charge)
        target = next((v for v in vals if v >= needed), None)
        if target is None:
            raise ValenceError(
                f"atom {idx} ({atom.symbol}, charge {atom.formal_charge:+d}) "
                f"has bond order sum {order_sum:g}, exceeding allowed valences {vals}"
            )
        atom.implicit_h = (target - needed) + extra


def _assign_radicals(mol: Molecule, atom: Atom) -> None:
    """Unpaired-electron count for bracket atoms with a standard valence model.

    An aromatic atom keeps one valence slot for the ring pi system, so that
    slot never counts as a radical ([nH] in pyrrole has zero).
    """
    vals = allowed_valences(atom.symbol, atom.formal_charge)
    if not vals:
        atom.num_radical_electrons = 0
        return
    if atom.aromatic:
        used = mol.degree(atom.index) + (atom.explicit_h or 0)
        target = next((v for v in vals if v >= used), None)
        atom.num_radical_electrons = (
            0 if target is None else max(0, target - used - 1)
        )
        return
    used = math.ceil(mol.bond_order_sum(atom.index) - 1e-9) + (atom.explicit_h or 0)
    target = next((v for v in vals if v >= used), None)
    atom.num_radical_electrons = 0 if target is None else max(0, target - used)


def _check_valences(mol: Molecule) -> None:
    for atom in mol.atoms:
        vals = allowed_valences(atom.symbol, atom.formal_charge)
        if not vals:
            continue
        if atom.aromatic:
            total = mol.degree(atom.index) + atom.total_h
            if total > max(vals):
                raise ValenceError(
                    f"aromatic atom {atom.index} ({atom.symbol}) has {total} "
                    f"sigma connections, exceeding valence {max(vals)}"
                )
        elif atom.explicit_h is None:
            order_sum = mol.bond_order_sum(atom.index) + atom.total_h
            if order_sum > max(vals):
                raise ValenceError(
                    f"atom {atom.index} ({atom.symbol}) valence {order_sum:g} "
                    f"exceeds maximum {max(vals)}"
                )


def _assign_hybridization(mol: Molecule) -> None:
    for atom in mol.atoms:
        idx = atom.index
        connections = mol.degree(idx) + atom.total_h
        if connections >= 6:
            atom.hybridization = Hybridization.SP3D2
            continue
        if connections == 5:
            atom.hybridization = Hybridization.SP3D
            continue
        if atom.aromatic:
            atom.hybridization = Hybridization.SP2
            continue
        orders = [b.order for b in mol.bonds_of(idx)]
        n_double = sum(1 for o in orders if o is BondOrder.DOUBLE)
        n_triple = sum(1 for o in orders if o is BondOrder.TRIPLE)
        if n_triple or n_double >= 2:
            atom.hybridization = Hybridization.SP
        elif n_double:
            atom.hybridization = Hybridization.SP2
        else:
            atom.hybridization = Hybridization.SP3


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string into a perceived Molecule.

    Raises SmilesSyntaxError, ValenceError or UnsupportedFeatureError on bad
    input. Stereochemistry is discarded with a UserWarning; for dot-separated
    input only the largest fragment survives (logged).
    """
    if not isinstance(text, str) or not text.strip():
        raise SmilesSyntaxError("empty SMILES input")
    state = _tokenize_and_build(text.strip())
    if state.saw_stereo:
        warnings.warn(
            f"stereochemistry markers in {text.strip()!r} were discarded",
            UserWarning,
            stacklevel=2,
        )
    _fold_hydrogens(state)
    mol, folded = _build_molecule(state)
    mol, folded = _keep_largest_fragment(mol, folded, text.strip())
    perceive_rings(mol)
    _assign_implicit_hydrogens(mol, folded)
    perceive_aromaticity(mol)
    _check_valences(mol)
    _assign_hybridization(mol)
    return mol
