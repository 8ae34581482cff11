"""Text embedding files, alignment maps and model checkpoints.

Embedding file layout (optionally gzip-compressed when the path ends in .gz)::

    #chronovec-emb v1
    #method<TAB>tsgns
    #shape<TAB>T<TAB>V<TAB>N
    #periods<TAB>1990<TAB>1991
    #sparse<TAB>0
    #aligned<TAB>0
    #config_hash<TAB>...
    #seed<TAB>0
    #argv<TAB>["train", "tsgns", ...]
    #meta<TAB>{json}
    #counts<TAB>1990<TAB>c_1 c_2 ... c_V      (one line per period, optional)
    word<TAB>period<TAB>x_1 x_2 ... x_N

Dense rows use nine significant digits. Sparse (PPMI) rows list
``column:value`` entries instead, since a dense |V|-wide row would be mostly
zeros.
"""

from __future__ import annotations

import gzip
import io
import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .alignment import AlignmentMap
from .corpus import Vocabulary
from .embeddings import METHODS, EmbeddingSet
from .errors import (
    DimensionMismatchError,
    EmbeddingFormatError,
    EmbeddingValidationError,
    TruncatedFileError,
    VersionMismatchError,
)
from .evaluation.report import _plain
from .sgns import SgnsModel, TrainConfig

EMB_MAGIC = "#chronovec-emb"
EMB_VERSION = "v1"
ALIGN_MAGIC = "#chronovec-align v1"


def _open(path, mode):
    path = Path(path)
    if path.suffix == ".gz":
        if mode == "w":
            # mtime=0 keeps compressed output byte-identical across runs
            return io.TextIOWrapper(gzip.GzipFile(path, "wb", mtime=0), encoding="utf-8", newline="\n")
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, mode, encoding="utf-8", newline="\n")


def _fmt(x: float) -> str:
    return "%.9g" % x


def write_embeddings(es: EmbeddingSet, path, config_hash: str = "", seed=None, argv=None) -> None:
    """Write ``es`` as a text embedding file (see module docstring)."""
    T, V, N = es.n_periods, es.vocab_size, es.dim
    seed = es.meta.get("seed") if seed is None else seed
    config_hash = config_hash or es.meta.get("config_hash", "")
    argv = es.meta.get("argv") if argv is None else argv
    meta = {k: v for k, v in es.meta.items() if k not in ("config_hash", "seed", "argv")}
    with _open(path, "w") as fh:
        fh.write(f"{EMB_MAGIC} {EMB_VERSION}\n")
        fh.write(f"#method\t{es.method}\n")
        fh.write(f"#shape\t{T}\t{V}\t{N}\n")
        fh.write("#periods\t" + "\t".join(es.periods) + "\n")
        fh.write(f"#sparse\t{int(es.is_sparse)}\n")
        fh.write(f"#aligned\t{int(es.aligned)}\n")
        fh.write(f"#config_hash\t{config_hash}\n")
        fh.write(f"#seed\t{json.dumps(_plain(seed))}\n")
        fh.write(f"#argv\t{json.dumps(_plain(argv))}\n")
        fh.write(f"#meta\t{json.dumps(_plain(meta), sort_keys=True)}\n")
        if es.period_counts is not None:
            for p, row in zip(es.periods, es.period_counts):
                fh.write(f"#counts\t{p}\t" + " ".join(_fmt(c) for c in row) + "\n")
        if es.is_sparse:
            m = es.matrix.tocsr()
            m.sort_indices()
            for t, p in enumerate(es.periods):
                for i, w in enumerate(es.words):
                    r = t * V + i
                    lo, hi = m.indptr[r], m.indptr[r + 1]
                    body = " ".join(f"{j}:{_fmt(x)}" for j, x in zip(m.indices[lo:hi], m.data[lo:hi]))
                    fh.write(f"{w}\t{p}\t{body}\n")
        else:
            mat = np.asarray(es.matrix, dtype=np.float64)
            for t, p in enumerate(es.periods):
                for i, w in enumerate(es.words):
                    fh.write(f"{w}\t{p}\t" + " ".join(map(_fmt, mat[t * V + i])) + "\n")


def read_embeddings(path) -> EmbeddingSet:
    """Parse a file written by :func:`write_embeddings`.

    Raises :class:`VersionMismatchError` for a foreign or newer format,
    :class:`TruncatedFileError` when records are missing,
    :class:`DimensionMismatchError` when a row has the wrong width and
    :class:`EmbeddingValidationError` for other inconsistencies (unknown
    periods, duplicate keys, a header that disagrees with the records).
    """
    header = {}
    counts = {}
    with _open(path, "r") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith(EMB_MAGIC):
            raise VersionMismatchError(f"{path}: not a chronovec embedding file")
        version = first[len(EMB_MAGIC):].strip()
        if version != EMB_VERSION:
            raise VersionMismatchError(f"{path}: format {version!r}, this reader handles {EMB_VERSION!r}")
        line = fh.readline()
        while line.startswith("#"):
            key, _, rest = line.rstrip("\n")[1:].partition("\t")
            if key == "counts":
                p, _, vals = rest.partition("\t")
                counts[p] = np.array([float(x) for x in vals.split()]) if vals else np.zeros(0)
            else:
                header[key] = rest
            line = fh.readline()
        try:
            method = header["method"]
            T, V, N = (int(x) for x in header["shape"].split("\t"))
            periods = tuple(header["periods"].split("\t")) if header["periods"] else ()
            sparse = header.get("sparse", "0") == "1"
        except (KeyError, ValueError) as exc:
            raise EmbeddingFormatError(f"{path}: malformed header ({exc})") from None
        if method not in METHODS:
            raise EmbeddingValidationError(f"{path}: unknown method {method!r}")
        if len(periods) != T:
            raise EmbeddingValidationError(f"{path}: header lists {len(periods)} periods but T={T}")
        p_index = {p: t for t, p in enumerate(periods)}
        words: list = []
        w_index: dict = {}
        seen = set()
        rows, cols, vals = [], [], []
        dense = np.zeros((T * V, N)) if not sparse else None
        lineno = len(header) + len(counts) + 1
        while line:
            lineno += 1
            if not line.endswith("\n"):
                raise TruncatedFileError(f"{path}:{lineno}: file ends mid-record")
            text = line.rstrip("\n")
            line = fh.readline()
            if not text:
                continue
            parts = text.split("\t")
            if len(parts) != 3:
                raise EmbeddingFormatError(f"{path}:{lineno}: expected word, period, values")
            w, p, body = parts
            if p not in p_index:
                raise EmbeddingValidationError(f"{path}:{lineno}: period {p!r} not declared in header (T={T})")
            if w not in w_index:
                if len(words) >= V:
                    raise EmbeddingValidationError(f"{path}:{lineno}: more than V={V} distinct words")
                w_index[w] = len(words)
                words.append(w)
            key = (w, p)
            if key in seen:
                raise EmbeddingValidationError(f"{path}:{lineno}: duplicate record for {key}")
            seen.add(key)
            r = p_index[p] * V + w_index[w]
            if sparse:
                for tok in body.split():
                    j, _, x = tok.partition(":")
                    j = int(j)
                    if not 0 <= j < N:
                        raise DimensionMismatchError(f"{path}:{lineno}: column {j} outside [0, {N})")
                    rows.append(r)
                    cols.append(j)
                    vals.append(float(x))
            else:
                xs = body.split(" ") if body else []
                if len(xs) != N:
                    raise DimensionMismatchError(f"{path}:{lineno}: {len(xs)} values, header says N={N}")
                dense[r] = [float(x) for x in xs]
    if len(seen) != T * V:
        raise TruncatedFileError(f"{path}: {len(seen)} records, expected T*V = {T * V}")
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(T * V, N)) if sparse else dense
    pc = None
    if counts:
        if set(counts) != set(periods) or any(c.size != V for c in counts.values()):
            raise EmbeddingValidationError(f"{path}: count lines disagree with the header")
        pc = np.vstack([counts[p] for p in periods])
    meta = json.loads(header.get("meta", "{}") or "{}")
    meta["config_hash"] = header.get("config_hash", "")
    meta["seed"] = json.loads(header.get("seed", "null") or "null")
    meta["argv"] = json.loads(header.get("argv", "null") or "null")
    return EmbeddingSet(method, periods, tuple(words), matrix, pc,
                        aligned=header.get("aligned", "0") == "1", meta=meta)


def read_provenance(path) -> dict:
    """Header fields of an embedding file without reading the records."""
    out = {}
    with _open(path, "r") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith(EMB_MAGIC):
            raise VersionMismatchError(f"{path}: not a chronovec embedding file")
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, rest = line.rstrip("\n")[1:].partition("\t")
            if key != "counts":
                out[key] = rest
    for key in ("argv", "seed", "meta"):
        if key in out and out[key]:
            out[key] = json.loads(out[key])
    return out


def write_alignment(amap: AlignmentMap, path) -> None:
    Q = np.asarray(amap.Q)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ALIGN_MAGIC + "\n")
        fh.write(f"#source\t{amap.source_period or ''}\n")
        fh.write(f"#target\t{amap.target_period or ''}\n")
        fh.write(f"#residual\t{amap.residual!r}\n")
        fh.write(f"#degenerate\t{int(amap.degenerate)}\n")
        fh.write(f"#dim\t{Q.shape[0]}\n")
        for row in Q:
            fh.write(" ".join("%.17g" % x for x in row) + "\n")


def read_alignment(path) -> AlignmentMap:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != ALIGN_MAGIC:
        raise VersionMismatchError(f"{path}: not a chronovec alignment file")
    head = {}
    body = []
    for line in lines[1:]:
        if line.startswith("#"):
            k, _, v = line[1:].partition("\t")
            head[k] = v
        elif line.strip():
            body.append([float(x) for x in line.split()])
    n = int(head.get("dim", len(body)))
    Q = np.array(body)
    if Q.shape != (n, n):
        raise DimensionMismatchError(f"{path}: expected a {n}x{n} matrix, got {Q.shape}")
    return AlignmentMap(Q, head.get("source") or None, head.get("target") or None,
                        float(head.get("residual", "nan")), head.get("degenerate") == "1")


def save_checkpoint(model: SgnsModel, path, config: TrainConfig = None) -> None:
    """Binary sidecar holding both SGNS layers so training can resume."""
    np.savez(
        path,
        input_weights=model.input_weights,
        output_weights=model.output_weights,
        words=np.array(model.vocab.words, dtype=str),
        counts=np.array([model.vocab.counts[w] for w in model.vocab.words], dtype=np.int64),
        periods=np.array(model.periods, dtype=str),
        info=np.array(json.dumps(_plain({"mode": model.mode, "tagged_contexts": model.tagged_contexts,
                                         "meta": model.meta,
                                         "config": config}), sort_keys=True)),
    )


def load_checkpoint(path):
    """Return ``(model, config_dict_or_None)`` from :func:`save_checkpoint` output."""
    with np.load(path, allow_pickle=False) as z:
        info = json.loads(str(z["info"]))
        words = tuple(z["words"].tolist())
        vocab = Vocabulary(words, {w: int(c) for w, c in zip(words, z["counts"])})
        model = SgnsModel(z["input_weights"].copy(), z["output_weights"].copy(), vocab, info["mode"],
                          tuple(z["periods"].tolist()), info["tagged_contexts"], info["meta"])
    return model, info.get("config")
