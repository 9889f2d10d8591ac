import pytest

from earlyrisk_sidecar.config import SidecarConfig


@pytest.fixture(scope="session")
def test_config():
    return SidecarConfig(backend="test", encoder_dim=1024, max_batch=16)


@pytest.fixture(scope="session")
def tiny_checkpoints(tmp_path_factory):
    """Small randomly initialized checkpoints saved to disk, so the real
    transformers loading path runs without any network access."""
    torch = pytest.importorskip("torch")
    transformers = pytest.importorskip("transformers")

    root = tmp_path_factory.mktemp("checkpoints")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + [
        w for w in ("the a an and or eating food weight shape fear joy sad "
                    "happy angry love day post text about feel body").split()
    ]
    (root / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = transformers.BertTokenizer(str(root / "vocab.txt"))

    torch.manual_seed(0)

    def save_model(model, name):
        path = root / name
        model.save_pretrained(path)
        tokenizer.save_pretrained(path)
        return str(path)

    encoder_cfg = transformers.BertConfig(
        vocab_size=len(vocab), hidden_size=1024, num_hidden_layers=1,
        num_attention_heads=8, intermediate_size=128, max_position_embeddings=512,
    )
    encoder = save_model(transformers.BertModel(encoder_cfg), "encoder")

    basic_cfg = transformers.BertConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=1,
        num_attention_heads=2, intermediate_size=32, max_position_embeddings=512,
        num_labels=6,
    )
    basic = save_model(
        transformers.BertForSequenceClassification(basic_cfg), "basic"
    )

    fine_cfg = transformers.BertConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=1,
        num_attention_heads=2, intermediate_size=32, max_position_embeddings=512,
        num_labels=28,
    )
    fine = save_model(
        transformers.BertForSequenceClassification(fine_cfg), "fine"
    )
    return {"encoder": encoder, "basic": basic, "fine": fine}
