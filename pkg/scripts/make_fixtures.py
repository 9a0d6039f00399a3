"""Regenerate the committed smoke-test fixtures.

Writes tests/data/smoke_compounds.csv (a ChEMBL-style activity table of 300
synthetic compounds) and tests/data/smoke_embeddings.r3emb (64-dim synthetic
embeddings keyed by canonical SMILES). The pIC50 surface blends a
descriptor-visible term (Crippen logP), a graph-visible term (aromatic atom
count) and the first embedding coordinate plus a small noise floor. The
embedding coordinate is random with respect to structure, so models trained
without that modality cannot recover it; that is what makes the fusion
comparison on this fixture meaningful.

Run from the repository root: python3 scripts/make_fixtures.py
"""

import csv
from pathlib import Path

import numpy as np

from rep3net.chem import canonical_smiles, parse_smiles
from rep3net.descriptors import descriptor_matrix
from rep3net.descriptors.compute import SCHEMA
from rep3net.embeddings import EmbeddingStore, write_store
from rep3net.exceptions import Rep3NetError

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"

SEED = 90210
N_COMPOUNDS = 300
EMB_DIM = 64

SCAFFOLDS = [
    "c1ccc({})cc1",
    "c1ccc({})cn1",
    "c1cc({})co1",
    "c1cc({})cs1",
    "c1ccn({})c1",
    "c1ccc(C({}))cc1",
    "C1CCC({})CC1",
    "C1CCN({})CC1",
    "C1CC({})C1",
    "C1CCOC({})C1",
]

SUBSTITUENTS = [
    "C", "CC", "CCC", "CCCC", "C(C)C", "C(C)(C)C", "O", "OC", "OCC",
    "N", "NC", "N(C)C", "F", "Cl", "Br", "I", "C#N", "C=O", "C(=O)C",
    "C(=O)O", "C(=O)OC", "C(=O)N", "CO", "CN", "CCl", "C(F)(F)F",
    "S", "SC", "CCO", "CC#N", "C=C", "CC(=O)O", "OC(=O)C", "CCN",
    "COC", "CCCO",
]


def build_library() -> list:
    """Scaffold x substituent grid, deduplicated on canonical SMILES."""
    seen = {}
    for scaffold in SCAFFOLDS:
        for sub in SUBSTITUENTS:
            candidate = scaffold.format(sub)
            try:
                canon = canonical_smiles(parse_smiles(candidate))
            except Rep3NetError:
                continue
            seen.setdefault(canon, candidate)
    canons = sorted(seen)
    if len(canons) < N_COMPOUNDS:
        raise SystemExit(f"library too small: {len(canons)} unique compounds")
    return canons[:N_COMPOUNDS]


def zscore(values: np.ndarray) -> np.ndarray:
    std = values.std()
    return (values - values.mean()) / (std if std > 0 else 1.0)


def main() -> None:
    canons = build_library()
    mols = [parse_smiles(s) for s in canons]
    desc = descriptor_matrix(mols)
    logp = zscore(desc[:, SCHEMA.index("crippen_logp")])
    arom = zscore(desc[:, SCHEMA.index("aromatic_atom_count")])

    rng = np.random.default_rng(SEED)
    emb = rng.standard_normal((len(canons), EMB_DIM))
    noise = rng.standard_normal(len(canons))
    pic50 = 6.0 + 0.6 * logp + 0.5 * arom + 0.8 * emb[:, 0] + 0.1 * noise
    value_nm = 10.0 ** (9.0 - pic50)

    DATA.mkdir(parents=True, exist_ok=True)
    csv_path = DATA / "smoke_compounds.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "molecule_chembl_id",
                "canonical_smiles",
                "standard_relation",
                "standard_value",
                "standard_units",
            ]
        )
        for i, (smiles, nm) in enumerate(zip(canons, value_nm)):
            writer.writerow([f"SMK{i:04d}", smiles, "=", repr(float(nm)), "nM"])

    store = EmbeddingStore(dim=EMB_DIM)
    for smiles, row in zip(canons, emb):
        store.add(smiles, row.astype(np.float32))
    write_store(store, DATA / "smoke_embeddings.r3emb")
    print(f"wrote {csv_path} ({len(canons)} compounds)")
    print(f"wrote {DATA / 'smoke_embeddings.r3emb'} (dim {EMB_DIM})")


if __name__ == "__main__":
    main()
