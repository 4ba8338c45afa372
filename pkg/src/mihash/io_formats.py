"""File formats and configuration parsing.

Binary layouts (all integers little-endian uint32, all floats little-endian):

  MIHF  feature file:   magic "MIHF", version=1, N, D, then N*D float32
                        row-major.  Loaded matrices are widened to float64.
  MIH1  model file:     magic "MIH1", D, K, weights D*K float64 row-major,
                        bias K float64.
  MIHC  code file:      magic "MIHC", N, K, then N rows of ceil(K/8) bytes,
                        LSB-first bit packing, bit=1 <=> code +1.
  MIHI  index file:     magic "MIHI", N, K, the MIHC byte block, then N
                        UTF-8 text lines "id,label1,label2,..." (labels may
                        be empty).

Label files are the same text lines without any binary framing.
Config files are flat "key=value" lines; '#' starts a comment.  Unknown
keys are rejected; command-line overrides win over file values.
"""
from __future__ import annotations

import io
import struct
from dataclasses import fields

import numpy as np

from .encoder import PackedCodes, packed_from_bytes, packed_row_bytes
from .errors import ConfigError, FormatError
from .training import TrainConfig

_MAX_DIM = 2**31 - 1
_MAX_PAYLOAD = 2**33        # 8 GiB: past any plausible desk-scale artifact


def _check_payload(nbytes: int, what: str):
    if nbytes > _MAX_PAYLOAD:
        raise FormatError(f"{what} of {nbytes} bytes exceeds supported size")


def _read_exact(f, n, what):
    _check_payload(n, what)
    data = f.read(n)
    if len(data) != n:
        raise FormatError(f"truncated file while reading {what}")
    return data


def _read_header(f, magic, n_fields):
    got = f.read(4)
    if got != magic:
        raise FormatError(f"bad magic: expected {magic!r}, got {got!r}")
    raw = _read_exact(f, 4 * n_fields, "header")
    vals = struct.unpack(f"<{n_fields}I", raw)
    for v in vals:
        if v > _MAX_DIM:
            raise FormatError(f"header field {v} exceeds supported size")
    return vals


def save_features(features: np.ndarray, path):
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise FormatError("features must be a 2-D matrix")
    n, d = features.shape
    with open(path, "wb") as f:
        f.write(b"MIHF" + struct.pack("<III", 1, n, d))
        f.write(features.astype("<f4").tobytes(order="C"))


def load_features(path) -> np.ndarray:
    with open(path, "rb") as f:
        version, n, d = _read_header(f, b"MIHF", 3)
        if version != 1:
            raise FormatError(f"unsupported feature-file version {version}")
        if n == 0 or d == 0:
            raise FormatError("empty dataset")
        payload = _read_exact(f, 4 * n * d, "feature payload")
        if f.read(1):
            raise FormatError("trailing bytes after feature payload")
    arr = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    return arr.reshape(n, d)


def load_features_csv(path) -> np.ndarray:
    """Fallback reader: comma-separated floats, one sample per line."""
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise FormatError(f"bad CSV feature file: {exc}") from exc
    if arr.size == 0:
        raise FormatError("empty dataset")
    return arr


def save_model(weights: np.ndarray, bias: np.ndarray, path):
    d, k = weights.shape
    with open(path, "wb") as f:
        f.write(b"MIH1" + struct.pack("<II", d, k))
        f.write(np.asarray(weights, dtype="<f8").tobytes(order="C"))
        f.write(np.asarray(bias, dtype="<f8").tobytes(order="C"))


def load_model(path):
    with open(path, "rb") as f:
        d, k = _read_header(f, b"MIH1", 2)
        if d == 0 or k == 0:
            raise FormatError("model with zero dimensions")
        w = _read_exact(f, 8 * d * k, "weights")
        b = _read_exact(f, 8 * k, "bias")
        if f.read(1):
            raise FormatError("trailing bytes after model payload")
    weights = np.frombuffer(w, dtype="<f8").astype(np.float64).reshape(d, k)
    bias = np.frombuffer(b, dtype="<f8").astype(np.float64)
    return weights, bias


def _codes_block(packed: PackedCodes) -> bytes:
    return packed_row_bytes(packed).tobytes(order="C")


def _codes_from_block(data: bytes, n: int, k: int) -> PackedCodes:
    nbytes = (k + 7) // 8
    raw = np.frombuffer(data, dtype=np.uint8).reshape(n, nbytes)
    return packed_from_bytes(raw, n, k)


def save_codes(packed: PackedCodes, path):
    with open(path, "wb") as f:
        f.write(b"MIHC" + struct.pack("<II", packed.n, packed.k))
        f.write(_codes_block(packed))


def load_codes(path) -> PackedCodes:
    with open(path, "rb") as f:
        n, k = _read_header(f, b"MIHC", 2)
        if n == 0 or k == 0:
            raise FormatError("empty code file")
        block = _read_exact(f, n * ((k + 7) // 8), "code payload")
        if f.read(1):
            raise FormatError("trailing bytes after code payload")
    return _codes_from_block(block, n, k)


def _parse_label_line(line: str):
    parts = line.rstrip("\n").split(",")
    sample_id = parts[0]
    labels = frozenset(tok for tok in parts[1:] if tok)
    return sample_id, labels


def load_labels(path):
    """Returns (ids, label_sets); one line per sample: id,tok1,tok2,..."""
    ids, labels = [], []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            sample_id, labs = _parse_label_line(line)
            ids.append(sample_id)
            labels.append(labs)
    if not ids:
        raise FormatError("empty label file")
    return ids, labels


def save_labels(ids, labels, path):
    with open(path, "w", encoding="utf-8") as f:
        for sample_id, labs in zip(ids, labels):
            f.write(",".join([str(sample_id)] + sorted(labs)) + "\n")


def save_index(packed: PackedCodes, ids, labels, path):
    if len(ids) != packed.n:
        raise FormatError("ids length does not match code rows")
    if labels is not None and len(labels) != packed.n:
        raise FormatError("labels length does not match code rows")
    text = io.StringIO()
    for row in range(packed.n):
        labs = sorted(labels[row]) if labels is not None else []
        text.write(",".join([str(ids[row])] + labs) + "\n")
    with open(path, "wb") as f:
        f.write(b"MIHI" + struct.pack("<II", packed.n, packed.k))
        f.write(_codes_block(packed))
        f.write(text.getvalue().encode("utf-8"))


def load_index(path):
    """Returns (packed, ids, labels); labels is None when no line has one."""
    with open(path, "rb") as f:
        n, k = _read_header(f, b"MIHI", 2)
        if n == 0 or k == 0:
            raise FormatError("empty index file")
        block = _read_exact(f, n * ((k + 7) // 8), "index code payload")
        tail = f.read().decode("utf-8", errors="strict")
    packed = _codes_from_block(block, n, k)
    lines = [ln for ln in tail.split("\n") if ln.strip()]
    if len(lines) != n:
        raise FormatError(
            f"index text block has {len(lines)} lines for {n} rows")
    ids, labels = [], []
    for line in lines:
        sample_id, labs = _parse_label_line(line)
        ids.append(sample_id)
        labels.append(labs)
    if all(not labs for labs in labels):
        labels = None
    return packed, ids, labels


_INT_KEYS = {"code_len", "batch_size", "epochs", "lr_decay_every", "seed",
             "shuffle_iters"}


def _coerce(key: str, value: str):
    value = value.strip()
    try:
        if key in _INT_KEYS:
            return int(value)
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key}: {value!r}") from exc


def parse_config(path=None, overrides=None) -> TrainConfig:
    """Build a TrainConfig from an optional key=value file plus overrides.

    Overrides (a {key: string} mapping, e.g. parsed from command-line
    --set flags) win over file values.  Unknown keys are rejected by
    name.  When beta is set nowhere, the per-code_len default applies.
    """
    known = {f.name for f in fields(TrainConfig)}
    merged = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(
                        f"line {lineno}: expected key=value, got {line!r}")
                key, value = (s.strip() for s in line.split("=", 1))
                if key not in known:
                    raise ConfigError(f"unknown config key: {key}")
                merged[key] = _coerce(key, value)
    for key, value in (overrides or {}).items():
        if key not in known:
            raise ConfigError(f"unknown config key: {key}")
        merged[key] = _coerce(key, str(value))
    return TrainConfig(**merged)


def dump_config(config: TrainConfig) -> str:
    """Render a config as key=value lines; parse_config inverts this."""
    lines = []
    for f in fields(config):
        lines.append(f"{f.name}={getattr(config, f.name)!r}")
    return "\n".join(lines) + "\n"
