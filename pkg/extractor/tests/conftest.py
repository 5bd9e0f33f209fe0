import json
import shutil
import string
import subprocess

import pytest


def build_tiny_clip(target):
    """Construct a small random-weight CLIP checkpoint on disk.

    Character-level tokenizer (every printable ASCII char with and
    without the end-of-word marker, no merges) so no downloaded vocab is
    needed; weights are seeded so the checkpoint is reproducible.
    """
    import torch
    from transformers import (CLIPConfig, CLIPImageProcessor, CLIPModel,
                              CLIPProcessor, CLIPTextConfig, CLIPTokenizer,
                              CLIPVisionConfig)

    target.mkdir(parents=True, exist_ok=True)
    tokens = ["<|startoftext|>", "<|endoftext|>"]
    chars = string.ascii_lowercase + string.digits + string.punctuation
    tokens += list(chars) + [c + "</w>" for c in chars]
    vocab = {tok: i for i, tok in enumerate(tokens)}
    (target / "vocab.json").write_text(json.dumps(vocab))
    (target / "merges.txt").write_text("#version: 0.2\n")
    tokenizer = CLIPTokenizer(str(target / "vocab.json"),
                              str(target / "merges.txt"))
    image_processor = CLIPImageProcessor(
        size={"shortest_edge": 32}, crop_size={"height": 32, "width": 32})
    processor = CLIPProcessor(image_processor=image_processor,
                              tokenizer=tokenizer)
    processor.save_pretrained(target)

    # bos/eos ids must match the tiny vocab: CLIP pools the hidden state
    # at the eos position, and a missing eos id collapses every text
    # embedding to the bos position
    text_cfg = CLIPTextConfig(vocab_size=len(vocab), hidden_size=32,
                              intermediate_size=64, num_hidden_layers=2,
                              num_attention_heads=4,
                              max_position_embeddings=77,
                              bos_token_id=vocab["<|startoftext|>"],
                              eos_token_id=vocab["<|endoftext|>"],
                              pad_token_id=vocab["<|endoftext|>"])
    vision_cfg = CLIPVisionConfig(hidden_size=32, intermediate_size=64,
                                  num_hidden_layers=2, num_attention_heads=4,
                                  image_size=32, patch_size=16)
    config = CLIPConfig(text_config=text_cfg.to_dict(),
                        vision_config=vision_cfg.to_dict(),
                        projection_dim=16)
    torch.manual_seed(20240824)
    model = CLIPModel(config)
    model.save_pretrained(target)
    return target


@pytest.fixture(scope="session")
def tiny_clip(tmp_path_factory):
    return build_tiny_clip(tmp_path_factory.mktemp("tiny_clip") / "ckpt")


@pytest.fixture(scope="session")
def xmeat_cli():
    path = shutil.which("xmeat")
    if path is None:
        pytest.skip("xmeat CLI not installed")
    return path


@pytest.fixture(scope="session")
def registry_dir(tmp_path_factory, xmeat_cli):
    # materialized through the xmeat CLI, the interface contract under test
    target = tmp_path_factory.mktemp("registry") / "reg"
    subprocess.run([xmeat_cli, "registry", "init", str(target),
                    "--placeholder-images"], check=True, capture_output=True)
    return target
