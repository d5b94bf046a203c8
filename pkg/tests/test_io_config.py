import zipfile

import numpy as np
import pytest

from oracles import random_graph
from pnpdesign.config import ConfigError, RunConfig, parse_pairs, read_config, write_config
from pnpdesign.io import (
    BundleError,
    dumps_report,
    load_bundle,
    read_preferences,
    save_bundle,
    write_preferences,
    write_preferences_tsv,
)
from pnpdesign.walks import fit_operators, infer_full


@pytest.fixture
def graph():
    return random_graph(np.random.default_rng(0), 12, 9, 7)


def test_bundle_round_trip_bit_exact(tmp_path, graph):
    ratings, membership = graph
    digest = save_bundle(tmp_path / "b.npz", ratings, membership, {"users": 12})
    r2, m2, meta = load_bundle(tmp_path / "b.npz")
    assert meta["content_hash"] == digest and meta["summary"] == {"users": 12}
    for a, b in ((ratings.matrix, r2.matrix), (membership.matrix, m2.matrix)):
        assert a.shape == b.shape
        assert np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)
        assert a.data.tobytes() == b.data.tobytes()
    assert np.array_equal(r2.user_ids, ratings.user_ids)
    assert np.array_equal(m2.catalog.feature_ids, membership.catalog.feature_ids)
    assert m2.catalog.types.tolist() == membership.catalog.types.tolist()


def test_bundle_tamper_detected(tmp_path, graph):
    ratings, membership = graph
    path = tmp_path / "b.npz"
    save_bundle(path, ratings, membership)
    with zipfile.ZipFile(path) as z:
        members = {n: z.read(n) for n in z.namelist()}
    data = np.load(path)
    r = data["r_data"].copy()
    r[0] += 0.5
    import io as _io

    buf = _io.BytesIO()
    np.save(buf, r)
    members["r_data.npy"] = buf.getvalue()
    with zipfile.ZipFile(path, "w") as z:
        for n, b in members.items():
            z.writestr(n, b)
    with pytest.raises(BundleError, match="hash mismatch"):
        load_bundle(path)


def test_bundle_garbage(tmp_path):
    p = tmp_path / "x.npz"
    p.write_bytes(b"not a bundle")
    with pytest.raises(BundleError):
        load_bundle(p)


def test_preference_binary_round_trip(tmp_path, graph):
    W = infer_full(fit_operators(*graph))
    write_preferences(tmp_path / "w.bin", W)
    W2 = read_preferences(tmp_path / "w.bin")
    assert W2.values.tobytes() == W.values.tobytes()
    assert W2.weights == W.weights and W2.delta == W.delta and W2.dataset_hash == W.dataset_hash
    raw = (tmp_path / "w.bin").read_bytes()
    (tmp_path / "t.bin").write_bytes(raw[:-8])
    with pytest.raises(BundleError):
        read_preferences(tmp_path / "t.bin")


def test_preference_tsv_threshold(tmp_path, graph):
    W = infer_full(fit_operators(*graph))
    n = write_preferences_tsv(tmp_path / "w.tsv", W, threshold=0.05)
    lines = (tmp_path / "w.tsv").read_text().splitlines()
    assert lines[0] == "user_id\tfeature_id\tscore" and len(lines) == n + 1
    assert n == int((np.abs(W.values) > 0.05).sum())
    assert all(abs(float(l.split("\t")[2])) > 0.05 for l in lines[1:])


def test_report_json_deterministic():
    rep = {"b": np.float64(0.5), "a": [np.int64(3), float("nan")], "c": np.arange(2)}
    assert dumps_report(rep) == dumps_report(dict(reversed(list(rep.items()))))
    assert '"a": [\n    3,\n    null\n  ]' in dumps_report(rep)


# ------------------------------------------------------------------ config


def test_config_file_and_override(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# run\nalpha = 0.6\nbeta = 0.1\ngamma = 0.3\ncap.actor = 3\ncap.genre = 1\nseed = 4\n")
    cfg = read_config(p)
    assert cfg.alpha == 0.6 and cfg.caps == {"actor": 3, "genre": 1} and cfg.seed == 4
    over = parse_pairs([("seed", 9), ("cap.genre", "2")], cfg)
    assert over.seed == 9 and over.caps == {"genre": 2}
    assert cfg.seed == 4  # base untouched


def test_config_round_trip(tmp_path):
    cfg = parse_pairs([("delta", "1.5"), ("budget.actor", "10"), ("seed", "3"), ("strict", "yes")])
    write_config(tmp_path / "c.cfg", cfg)
    assert read_config(tmp_path / "c.cfg").resolved() == cfg.resolved()


@pytest.mark.parametrize(
    "pairs",
    [[("alpha", "0.9")], [("delta", "-1")], [("mode", "magic")], [("folds", "1")]],
)
def test_config_validation(pairs):
    with pytest.raises(ConfigError):
        parse_pairs(pairs).validate()


def test_config_unknown_key_and_seed():
    with pytest.raises(ConfigError):
        parse_pairs([("colour", "red")])
    with pytest.raises(ConfigError):
        parse_pairs([("alpha", "abc")])
    with pytest.raises(ConfigError, match="seed"):
        RunConfig().validate(needs_seed=True)
