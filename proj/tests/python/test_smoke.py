# Copyright 2026 The Versebias Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import os
import pathlib
import subprocess

import pytest

import versebias as vb


def test_tokenizer_round_trip():
    vocab = vb.SubwordVocab.train(["the sea the sea", "the sun"], 270)
    ids = vocab.encode("the sea")
    assert ids[0] == 2 and ids[-1] == 3
    assert vocab.decode(ids) == "the sea"
    assert vb.SubwordVocab.deserialize(vocab.serialize()).encode("the sun") == vocab.encode("the sun")
    assert vocab.decode(vocab.encode("ünïcode ok")) == "ünïcode ok"


def test_score_is_dot_product():
    assert vb.score([1.0, 2.0], [3.0, -1.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        vb.score([1.0], [1.0, 2.0])


def test_prompts():
    prompts = vb.build_prompts()
    lists = [p[2] for p in prompts]
    assert lists.count("demographic") == 50 and lists.count("other") == 48
    assert prompts[0][0].startswith("The ")


def test_pronoun_swap():
    assert vb.swap_gender_pronouns("She saw herself") == "He saw himself"
    assert vb.has_demographic_mention("the women sing")
    assert not vb.has_demographic_mention("the ducks sing")


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    cli = os.environ.get("VERSEBIAS_CLI")
    if not cli:
        pytest.skip("VERSEBIAS_CLI not set")
    root = tmp_path_factory.mktemp("ws")
    source = pathlib.Path(os.environ["VERSEBIAS_SOURCE_DIR"])
    config = json.loads((source / "data/sample/pipeline.json").read_text())
    config["paths"] = {
        "corpus": str(source / "data/sample/poems.jsonl"),
        "sentiment_data": str(source / "data/sample/sentiment"),
        "out_dir": str(root / "out"),
    }
    config["training"]["steps"] = 60
    config["encoder"].update(model_dim=8, ff_hidden=8, head_hidden=8, embedding_dim=8)
    cfg = root / "pipeline.json"
    cfg.write_text(json.dumps(config))
    env = dict(os.environ, VERSEBIAS_LOG_LEVEL="warn")
    for stage in (["ingest"], ["train-sentiment"], ["train-tokenizer"],
                  ["train-retriever", "baseline"], ["build-index", "baseline"]):
        subprocess.run([cli, "--config", str(cfg), *stage], check=True, env=env)
    return root / "out"


def test_suggest_from_cli_artifacts(workspace):
    retriever = vb.Retriever.load(workspace / "tokenizer/vocab.bpe",
                                  workspace / "retriever/baseline.ckpt")
    index = vb.VerseIndex.load(workspace / "index/baseline.idx")
    top = index.suggest(retriever, "the women walk by the sea", n=10)
    assert [s["rank"] for s in top] == list(range(1, 11))
    scores = [s["score"] for s in top]
    assert scores == sorted(scores, reverse=True)
    page = index.suggest(retriever, "the women walk by the sea", n=5, offset=5)
    assert [s["verse"] for s in page] == [s["verse"] for s in top[5:]]
    h = retriever.embed("the women walk by the sea")
    y = retriever.embed(top[0]["verse"], response=True)
    assert vb.score(h, y) == pytest.approx(top[0]["score"], rel=1e-4, abs=1e-4)


def test_sentiment_from_cli_artifacts(workspace):
    model = vb.SentimentModel.load(workspace / "sentiment/model.json")
    label, probs = model.classify("the women walk by the sea in cold despair")
    assert label in probs
    assert sum(probs.values()) == pytest.approx(1.0)
    assert model.score("") == 0
