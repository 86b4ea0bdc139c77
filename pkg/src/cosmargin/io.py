"""File formats: embeddings (TSV and binary), trials, scores, projections.

Text formats are UTF-8 with LF line endings and tab separators. Floats are
written with Python's shortest round-trip repr, so a text round-trip
reproduces the exact float64 values. Binary formats are little-endian and
row-major, and round-trip bit-exactly.

Layouts
-------
Embedding TSV   header line ``#dim<TAB>D``, then per record
                ``speaker<TAB>utterance<TAB>v1 ... vD``.
Embedding binary  magic ``EMB1``, u32 dim, u64 record count, then per
                record: u16 speaker byte-length + bytes, u16 utterance
                byte-length + bytes, dim float64 values.
Trial TSV       ``enroll<TAB>test<TAB>target|nontarget``, no header.
Score TSV       ``enroll<TAB>test<TAB>score``, no header.
Projection      magic ``PRJ1``, u32 output dim, u32 input dim, the matrix
                as float64 values, u32 provenance byte-length + UTF-8 text.
"""

from __future__ import annotations

import struct

import numpy as np

from .data import Dataset, Trial
from .metric import Projection
from .scoring import ScoreSet

EMB_MAGIC = b"EMB1"
PRJ_MAGIC = b"PRJ1"

EMBEDDING_FORMATS = ("tsv", "binary")


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------

def write_embeddings(dataset: Dataset, path, fmt: str = "binary") -> None:
    if fmt == "tsv":
        _write_embeddings_tsv(dataset, path)
    elif fmt == "binary":
        _write_embeddings_binary(dataset, path)
    else:
        raise ValueError(f"unknown embedding format {fmt!r}; use 'tsv' or 'binary'")


def load_embeddings(path, fmt: str = "binary", length_norm: bool = False) -> Dataset:
    """Load a Dataset, optionally dividing each vector by its L2 norm.

    Cosine scoring is norm-invariant so length_norm defaults to off; it is
    exposed for training recipes that want unit-norm inputs.
    """
    if fmt == "tsv":
        dataset = _load_embeddings_tsv(path)
    elif fmt == "binary":
        dataset = _load_embeddings_binary(path)
    else:
        raise ValueError(f"unknown embedding format {fmt!r}; use 'tsv' or 'binary'")
    if length_norm:
        norms = np.linalg.norm(dataset.vectors, axis=1, keepdims=True)
        dataset = Dataset(
            dataset.dim,
            dataset.speaker_ids,
            dataset.utterance_ids,
            dataset.vectors / norms,
        )
    return dataset


def _write_embeddings_tsv(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#dim\t{dataset.dim}\n")
        for emb in dataset:
            values = "\t".join(_fmt(v) for v in emb.vector)
            fh.write(f"{emb.speaker_id}\t{emb.utterance_id}\t{values}\n")


def _load_embeddings_tsv(path) -> Dataset:
    speaker_ids, utterance_ids, rows = [], [], []
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        header = fh.readline()
        if not header:
            raise ValueError(f"{path}: empty file, expected '#dim<TAB>D' header")
        parts = header.rstrip("\n").split("\t")
        if len(parts) != 2 or parts[0] != "#dim":
            raise ValueError(f"{path}: line 1: malformed header {header!r}")
        try:
            dim = int(parts[1])
        except ValueError:
            raise ValueError(f"{path}: line 1: bad dimension {parts[1]!r}") from None

        for lineno, line in enumerate(fh, start=2):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != dim + 2:
                raise ValueError(
                    f"{path}: line {lineno}: expected {dim + 2} fields, "
                    f"got {len(fields)}"
                )
            try:
                vec = [float(x) for x in fields[2:]]
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: non-numeric vector entry"
                ) from None
            speaker_ids.append(fields[0])
            utterance_ids.append(fields[1])
            rows.append(vec)
    try:
        return Dataset(dim, speaker_ids, utterance_ids, np.array(rows))
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def _write_embeddings_binary(dataset: Dataset, path) -> None:
    with open(path, "wb") as fh:
        fh.write(EMB_MAGIC)
        fh.write(struct.pack("<IQ", dataset.dim, len(dataset)))
        for emb in dataset:
            spk = emb.speaker_id.encode("utf-8")
            utt = emb.utterance_id.encode("utf-8")
            fh.write(struct.pack("<H", len(spk)) + spk)
            fh.write(struct.pack("<H", len(utt)) + utt)
            fh.write(np.ascontiguousarray(emb.vector, dtype="<f8").tobytes())


def _load_embeddings_binary(path) -> Dataset:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != EMB_MAGIC:
        raise ValueError(f"{path}: bad magic, not an embedding file")
    try:
        dim, count = struct.unpack_from("<IQ", blob, 4)
        offset = 4 + 12
        speaker_ids, utterance_ids, rows = [], [], []
        vec_bytes = 8 * dim
        for rec in range(count):
            (n,) = struct.unpack_from("<H", blob, offset)
            offset += 2
            speaker_ids.append(blob[offset : offset + n].decode("utf-8"))
            offset += n
            (n,) = struct.unpack_from("<H", blob, offset)
            offset += 2
            utterance_ids.append(blob[offset : offset + n].decode("utf-8"))
            offset += n
            if offset + vec_bytes > len(blob):
                raise ValueError(f"{path}: record {rec}: truncated vector")
            rows.append(np.frombuffer(blob, dtype="<f8", count=dim, offset=offset))
            offset += vec_bytes
        if offset != len(blob):
            raise ValueError(f"{path}: {len(blob) - offset} trailing bytes")
    except struct.error:
        raise ValueError(f"{path}: truncated record header") from None
    vectors = np.array(rows) if rows else np.empty((0, dim))
    try:
        return Dataset(dim, speaker_ids, utterance_ids, vectors)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# trials
# ---------------------------------------------------------------------------

def write_trials(trials, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in trials:
            label = "target" if t.is_target else "nontarget"
            fh.write(f"{t.enroll_utt}\t{t.test_utt}\t{label}\n")


def load_trials(path) -> list[Trial]:
    trials = []
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise ValueError(
                    f"{path}: line {lineno}: expected 3 fields, got {len(fields)}"
                )
            enroll, test, label = fields
            if label not in ("target", "nontarget"):
                raise ValueError(
                    f"{path}: line {lineno}: unknown label {label!r} "
                    f"(expected 'target' or 'nontarget')"
                )
            try:
                trials.append(Trial(enroll, test, label == "target"))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return trials


# ---------------------------------------------------------------------------
# scores
# ---------------------------------------------------------------------------

def write_scores(scores: ScoreSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for enroll, test, value in scores:
            fh.write(f"{enroll}\t{test}\t{_fmt(value)}\n")


def load_scores(path) -> ScoreSet:
    entries = []
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise ValueError(
                    f"{path}: line {lineno}: expected 3 fields, got {len(fields)}"
                )
            try:
                value = float(fields[2])
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: non-numeric score {fields[2]!r}"
                ) from None
            entries.append((fields[0], fields[1], value))
    try:
        return ScoreSet(entries)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------

def write_projection(proj: Projection, path) -> None:
    with open(path, "wb") as fh:
        fh.write(PRJ_MAGIC)
        fh.write(struct.pack("<II", proj.d_out, proj.d_in))
        fh.write(np.ascontiguousarray(proj.matrix, dtype="<f8").tobytes())
        text = proj.provenance.encode("utf-8")
        fh.write(struct.pack("<I", len(text)) + text)


def load_projection(path) -> Projection:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != PRJ_MAGIC:
        raise ValueError(f"{path}: bad magic, not a projection file")
    try:
        d_out, d_in = struct.unpack_from("<II", blob, 4)
        offset = 12
        n = d_out * d_in
        if offset + 8 * n + 4 > len(blob):
            raise ValueError(f"{path}: truncated matrix payload")
        matrix = (
            np.frombuffer(blob, dtype="<f8", count=n, offset=offset)
            .reshape(d_out, d_in)
            .copy()
        )
        offset += 8 * n
        (text_len,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        if offset + text_len != len(blob):
            raise ValueError(f"{path}: provenance length mismatch")
        provenance = blob[offset : offset + text_len].decode("utf-8")
    except struct.error:
        raise ValueError(f"{path}: truncated header") from None
    return Projection(matrix, provenance)
