"""Offline fixtures: a tiny randomly initialized BERT checkpoint."""

import pytest

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "hello", "world", "build", "the", "wall", "you", "are", "second",
    "make", "america", "great", "again", "##ing", "bitch", "a", "b", "c",
]


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    root = tmp_path_factory.mktemp("ckpt") / "tiny-bert"
    root.mkdir()
    # transformers >= 5 takes a vocab dict (or path) as the first arg;
    # the old vocab_file keyword is silently swallowed by **kwargs
    tokenizer = BertTokenizer(vocab={word: i for i, word in enumerate(VOCAB)},
                              do_lower_case=True)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=16,
        num_hidden_layers=5,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=64,
    )
    torch.manual_seed(1234)
    model = BertModel(config)
    model.save_pretrained(root)
    tokenizer.save_pretrained(root)
    return str(root)


@pytest.fixture
def corpus_tsv(tmp_path):
    path = tmp_path / "corpus.tsv"
    path.write_text(
        "id\ttext\tHS\tlang\n"
        "t1\thello world\t0\ten\n"
        "t2\tbuild the wall again\t1\ten\n"
        "t3\tyou are second\t0\ten\n",
        encoding="utf-8",
    )
    return str(path)
