"""Persistence: graph bundles, preference-matrix exports and JSON reports.

A bundle is an ``.npz`` archive holding the ratings and membership matrices,
their id maps and the feature catalog, plus a format version and a sha256
over every stored array. :func:`load_bundle` recomputes the hash and refuses
archives that were modified after writing.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .graph import FeatureCatalog, MembershipMatrix, RatingsMatrix, dataset_hash
from .walks import PathWeights, PreferenceMatrix

BUNDLE_VERSION = 1
_BUNDLE_KEYS = (
    "r_shape",
    "r_indptr",
    "r_indices",
    "r_data",
    "user_ids",
    "movie_ids",
    "f_shape",
    "f_indptr",
    "f_indices",
    "f_movie_ids",
    "feature_ids",
    "feature_types",
)

PREF_MAGIC = b"PNPW"
PREF_VERSION = 1
# magic, version, u, f, alpha, beta, gamma, delta, 16-byte dataset hash
_PREF_HEADER = struct.Struct("<4sIQQdddd16s")


class BundleError(ValueError):
    """Unreadable, wrong-version or tampered bundle."""


def _content_hash(arrays: dict) -> str:
    h = hashlib.sha256()
    for key in _BUNDLE_KEYS:
        a = np.ascontiguousarray(arrays[key])
        h.update(key.encode())
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def save_bundle(path, ratings: RatingsMatrix, membership: MembershipMatrix, summary: dict | None = None) -> str:
    """Write a bundle and return its content hash."""
    R, F = ratings.matrix, membership.matrix
    cat = membership.catalog
    arrays = {
        "r_shape": np.array(R.shape, dtype=np.int64),
        "r_indptr": R.indptr.astype(np.int64),
        "r_indices": R.indices.astype(np.int64),
        "r_data": R.data.astype(np.float64),
        "user_ids": ratings.user_ids.astype(np.int64),
        "movie_ids": ratings.movie_ids.astype(np.int64),
        "f_shape": np.array(F.shape, dtype=np.int64),
        "f_indptr": F.indptr.astype(np.int64),
        "f_indices": F.indices.astype(np.int64),
        "f_movie_ids": membership.movie_ids.astype(np.int64),
        "feature_ids": cat.feature_ids.astype(np.int64),
        "feature_types": np.array(cat.types.tolist(), dtype=str),
    }
    digest = _content_hash(arrays)
    meta = {"version": BUNDLE_VERSION, "content_hash": digest, "summary": summary or {}}
    with open(path, "wb") as fh:
        np.savez_compressed(fh, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)
    return digest


def load_bundle(path, verify: bool = True):
    """Read a bundle; returns ``(ratings, membership, meta)``."""
    try:
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            arrays = {k: z[k] for k in _BUNDLE_KEYS}
    except (OSError, KeyError, ValueError) as exc:
        raise BundleError(f"cannot read bundle {path}: {exc}") from None
    if meta.get("version") != BUNDLE_VERSION:
        raise BundleError(f"bundle version {meta.get('version')} unsupported (want {BUNDLE_VERSION})")
    if verify and _content_hash(arrays) != meta.get("content_hash"):
        raise BundleError(f"content hash mismatch in {path}: bundle was modified")
    R = sp.csr_matrix(
        (arrays["r_data"], arrays["r_indices"].astype(np.int32), arrays["r_indptr"].astype(np.int32)),
        shape=tuple(arrays["r_shape"]),
    )
    F = sp.csr_matrix(
        (np.ones(len(arrays["f_indices"])), arrays["f_indices"].astype(np.int32), arrays["f_indptr"].astype(np.int32)),
        shape=tuple(arrays["f_shape"]),
    )
    ratings = RatingsMatrix(R, arrays["user_ids"], arrays["movie_ids"])
    catalog = FeatureCatalog(arrays["feature_ids"], np.array(arrays["feature_types"].tolist(), dtype=object))
    membership = MembershipMatrix(F, arrays["f_movie_ids"], catalog)
    return ratings, membership, meta


# ------------------------------------------------------- preference exports


def write_preferences(path, W: PreferenceMatrix) -> None:
    """Binary export: fixed header, then ``u*f`` little-endian float64 row-major."""
    u, f = W.shape
    a, b, g = W.weights.as_tuple()
    head = _PREF_HEADER.pack(
        PREF_MAGIC, PREF_VERSION, u, f, a, b, g, float(W.delta), W.dataset_hash.encode().ljust(16, b"\0")[:16]
    )
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(W.values, dtype="<f8").tobytes())


def read_preferences(path) -> PreferenceMatrix:
    with open(path, "rb") as fh:
        raw = fh.read(_PREF_HEADER.size)
        if len(raw) != _PREF_HEADER.size:
            raise BundleError("truncated preference header")
        magic, version, u, f, a, b, g, delta, digest = _PREF_HEADER.unpack(raw)
        if magic != PREF_MAGIC or version != PREF_VERSION:
            raise BundleError("not a preference matrix file")
        body = np.frombuffer(fh.read(), dtype="<f8")
    if body.size != u * f:
        raise BundleError(f"expected {u * f} scores, found {body.size}")
    return PreferenceMatrix(
        body.reshape(u, f).astype(np.float64), PathWeights(a, b, g), delta, digest.rstrip(b"\0").decode()
    )


def write_preferences_tsv(path, W: PreferenceMatrix, threshold: float = 0.0) -> int:
    """``user_id, feature_id, score`` rows with ``|score| > threshold``; returns row count."""
    if W.user_ids is None or W.feature_ids is None:
        raise ValueError("TSV export needs user and feature ids on the matrix")
    rows, cols = np.nonzero(np.abs(W.values) > threshold)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("user_id\tfeature_id\tscore\n")
        for r, c in zip(rows, cols):
            fh.write(f"{W.user_ids[r]}\t{W.feature_ids[c]}\t{float(W.values[r, c])!r}\n")
    return len(rows)


# ------------------------------------------------------------------ reports


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, float) and x != x:
        return None
    return x


def dumps_report(report: dict) -> str:
    """Deterministic JSON text (sorted keys, NaN mapped to null)."""
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def write_report(path, report: dict) -> None:
    Path(path).write_text(dumps_report(report), encoding="utf-8")


def write_tsv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(str(v) for v in row) + "\n")


__all__ = [
    "BUNDLE_VERSION",
    "BundleError",
    "dataset_hash",
    "dumps_report",
    "load_bundle",
    "read_preferences",
    "save_bundle",
    "write_preferences",
    "write_preferences_tsv",
    "write_report",
    "write_tsv",
]
