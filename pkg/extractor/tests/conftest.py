"""Shared fixtures: a tiny local RoBERTa so no test touches the network.

The model is built once per session with fixed seeds: a character-level
BPE tokenizer over the SMILES alphabet and a 2-layer, 16-wide encoder.
Weights are random; the extractor only cares that inference is a
deterministic frozen function.
"""

import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

import pytest

SMILES_ALPHABET = list("#%()+-./0123456789=@BCFHIKLNOPS[\\]acilnoprs")
HIDDEN = 16


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    import torch
    from tokenizers import Tokenizer, models, pre_tokenizers, processors
    from transformers import PreTrainedTokenizerFast, RobertaConfig, RobertaModel

    specials = ["<s>", "<pad>", "</s>", "<unk>", "<mask>"]
    vocab = {tok: i for i, tok in enumerate(specials + SMILES_ALPHABET)}
    tok = Tokenizer(models.BPE(vocab=vocab, merges=[], unk_token="<unk>"))
    tok.pre_tokenizer = pre_tokenizers.Split("", "isolated")
    tok.post_processor = processors.RobertaProcessing(
        sep=("</s>", vocab["</s>"]), cls=("<s>", vocab["<s>"])
    )
    wrapper = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        bos_token="<s>",
        eos_token="</s>",
        pad_token="<pad>",
        unk_token="<unk>",
        mask_token="<mask>",
        model_max_length=64,
    )
    config = RobertaConfig(
        vocab_size=len(vocab),
        hidden_size=HIDDEN,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=66,
        pad_token_id=vocab["<pad>"],
        bos_token_id=vocab["<s>"],
        eos_token_id=vocab["</s>"],
    )
    torch.manual_seed(0)
    model = RobertaModel(config)
    model.eval()

    directory = tmp_path_factory.mktemp("tiny_model")
    model.save_pretrained(directory)
    wrapper.save_pretrained(directory)
    return str(directory)


@pytest.fixture()
def curated_csv(tmp_path):
    path = tmp_path / "curated.csv"
    path.write_text(
        "canonical_smiles,ic50_nm_median,pic50\n"
        "CCO,100.0,7.0\n"
        "c1ccccc1O,50.0,7.3\n"
        "CC(=O)Nc1ccc(O)cc1,250.0,6.6\n"
    )
    return path
