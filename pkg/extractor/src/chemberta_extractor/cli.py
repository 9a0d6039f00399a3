"""chemberta-extract: write an R3EMB1 embedding store from a compound CSV.

    chemberta-extract extract --input curated.csv --model <id> \
        --pooling mean --out embeddings.r3emb

Exit codes: 0 success, 1 extraction failure, 2 usage error (argparse).
"""

import argparse
import sys

from .extract import DEFAULT_MODEL, POOLINGS, ExtractError, extract, manifest_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemberta-extract",
        description="embed canonical SMILES with a frozen masked language model",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    ex = sub.add_parser("extract", help="write an R3EMB1 store plus manifest")
    ex.add_argument("--input", required=True, help="CSV with a canonical_smiles column")
    ex.add_argument("--model", default=DEFAULT_MODEL, help="model identifier or local path")
    ex.add_argument("--pooling", choices=POOLINGS, default="mean")
    ex.add_argument("--out", required=True, help="output .r3emb path")
    ex.add_argument("--batch-size", type=int, default=32)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        from transformers.utils import logging as hf_logging

        hf_logging.disable_progress_bar()
    except Exception:
        pass
    try:
        manifest = extract(
            args.input,
            args.out,
            model_id=args.model,
            pooling=args.pooling,
            batch_size=args.batch_size,
        )
    except ExtractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {args.out} ({manifest.count} embeddings, dim={manifest.dim}, "
        f"pooling={manifest.pooling}); manifest {manifest_path(args.out)}; "
        f"skipped {len(manifest.skipped)} rows"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
