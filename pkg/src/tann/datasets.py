"""Datasets: logic gates, text corpora, tokenization, and vectorization.

Everything loads from local files; nothing reaches the network.  A small
synthetic spam/ham corpus ships with the package for self-contained text
experiments (``bundled_spam_path``).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .exceptions import ContractError, FormatError

log = logging.getLogger(__name__)

XOR = "xor"
AND = "and"
OR = "or"

_GATE_TABLES = {
    XOR: [([0, 0], 0), ([0, 1], 1), ([1, 0], 1), ([1, 1], 0)],
    AND: [([0, 0], 0), ([0, 1], 0), ([1, 0], 0), ([1, 1], 1)],
    OR: [([0, 0], 0), ([0, 1], 1), ([1, 0], 1), ([1, 1], 1)],
}

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")


@dataclass
class Dataset:
    samples: list  # (features: np.ndarray, label: int)
    num_classes: int
    feature_width: int
    class_names: list = field(default_factory=list)

    def __len__(self):
        return len(self.samples)

    def validate(self):
        if not self.samples:
            raise ContractError("dataset is empty")
        for x, y in self.samples:
            if x.shape[0] != self.feature_width:
                raise ContractError("inconsistent feature widths in dataset")
            if not 0 <= y < self.num_classes:
                raise ContractError(f"label {y} out of range")
        return self


@dataclass
class Vocab:
    index: dict  # token -> dense index in [0, size)
    doc_freq: dict  # token -> number of documents containing it
    num_docs: int
    max_features: int

    @property
    def size(self):
        return len(self.index)


@dataclass(frozen=True)
class VectorizerConfig:
    max_features: int = 2000
    weighting: str = "tfidf"  # or "tf"
    lowercase: bool = True

    def __post_init__(self):
        if self.max_features < 1:
            raise ContractError("max_features must be >= 1")
        if self.weighting not in ("tf", "tfidf"):
            raise ContractError(f"unknown weighting {self.weighting!r}")


def gate_dataset(kind: str) -> Dataset:
    """The four-pattern truth table for xor/and/or, in printed order."""
    if kind not in _GATE_TABLES:
        raise ContractError(f"unknown gate {kind!r}; expected xor, and, or or")
    samples = [
        (np.array(x, dtype=np.float64), y) for x, y in _GATE_TABLES[kind]
    ]
    return Dataset(samples=samples, num_classes=2, feature_width=2,
                   class_names=["0", "1"])


def load_labeled_lines(path) -> list[tuple[str, str]]:
    """Read ``label<TAB>text`` lines; malformed lines are logged and skipped."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise OSError(f"cannot read corpus file {path}: {err}") from err
    pairs = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            log.warning("%s:%d: no tab separator, line skipped", path, lineno)
            continue
        label, text = line.split("\t", 1)
        label = label.strip()
        if not label:
            log.warning("%s:%d: empty label, line skipped", path, lineno)
            continue
        pairs.append((label, text))
    if not pairs:
        raise FormatError(f"{path}: no parseable label<TAB>text lines")
    return pairs


def load_dir_per_class(root_dir) -> list[tuple[str, str]]:
    """One subdirectory per class, one document per file.

    Class names are the sorted subdirectory names, so label indices are
    deterministic.  Empty subdirectories are kept as classes (with a warning).
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise OSError(f"{root} is not a directory")
    class_dirs = sorted(d for d in root.iterdir() if d.is_dir())
    if not class_dirs:
        raise FormatError(f"{root}: no class subdirectories")
    pairs = []
    for d in class_dirs:
        files = sorted(f for f in d.iterdir() if f.is_file())
        if not files:
            log.warning("class directory %s is empty; class retained", d)
        for f in files:
            pairs.append((d.name, f.read_text(encoding="utf-8", errors="replace")))
    return pairs


def corpus_classes(corpus) -> list[str]:
    """Sorted distinct labels of a (label, text) corpus."""
    return sorted({label for label, _ in corpus})


def tokenize(text: str, cfg: VectorizerConfig = VectorizerConfig()) -> list[str]:
    """Split on non-alphanumeric runs; lowercase when configured."""
    if cfg.lowercase:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def build_vocab(corpus, cfg: VectorizerConfig = VectorizerConfig()) -> Vocab:
    """Top ``max_features`` tokens by document frequency, ties lexicographic."""
    if not corpus:
        raise ContractError("cannot build a vocabulary from an empty corpus")
    df: dict[str, int] = {}
    for _, text in corpus:
        for tok in set(tokenize(text, cfg)):
            df[tok] = df.get(tok, 0) + 1
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = ranked[: cfg.max_features]
    index = {tok: i for i, tok in enumerate(sorted(t for t, _ in kept))}
    return Vocab(
        index=index,
        doc_freq={tok: df[tok] for tok in index},
        num_docs=len(corpus),
        max_features=cfg.max_features,
    )


def vectorize(corpus, vocab: Vocab, cfg: VectorizerConfig = VectorizerConfig()) -> Dataset:
    """Fixed-width feature vectors over the vocabulary.

    TF is raw counts over total document tokens; TFIDF multiplies TF by
    ln((1 + D) / (1 + df)) + 1 and L2-normalizes each non-zero row.
    """
    classes = corpus_classes(corpus)
    label_index = {c: i for i, c in enumerate(classes)}
    width = vocab.size
    idf = np.ones(width)
    if cfg.weighting == "tfidf":
        for tok, j in vocab.index.items():
            idf[j] = np.log((1.0 + vocab.num_docs) / (1.0 + vocab.doc_freq[tok])) + 1.0
    samples = []
    for label, text in corpus:
        tokens = tokenize(text, cfg)
        vec = np.zeros(width)
        for tok in tokens:
            j = vocab.index.get(tok)
            if j is not None:
                vec[j] += 1.0
        if tokens:
            vec /= float(len(tokens))
        if cfg.weighting == "tfidf":
            vec *= idf
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec /= norm
        samples.append((vec, label_index[label]))
    return Dataset(
        samples=samples,
        num_classes=len(classes),
        feature_width=width,
        class_names=classes,
    )


def train_test_split(ds: Dataset, ratio: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled split into floor(n*ratio) train / rest test."""
    if not 0.0 < ratio < 1.0:
        raise ContractError(f"split ratio must be in (0, 1), got {ratio}")
    n = len(ds)
    cut = int(n * ratio)
    if cut == 0 or cut == n:
        raise ContractError(f"ratio {ratio} leaves an empty side for n={n}")
    order = np.random.default_rng(seed).permutation(n)
    pick = lambda idxs: Dataset(
        samples=[ds.samples[i] for i in idxs],
        num_classes=ds.num_classes,
        feature_width=ds.feature_width,
        class_names=list(ds.class_names),
    )
    return pick(order[:cut]), pick(order[cut:])


def dataset_csv(ds: Dataset) -> str:
    """Debug snapshot: header ``label,f0,f1,...`` then one row per sample."""
    header = "label," + ",".join(f"f{i}" for i in range(ds.feature_width))
    lines = [header]
    for x, y in ds.samples:
        lines.append(str(y) + "," + ",".join(repr(float(v)) for v in x))
    return "\n".join(lines) + "\n"


def bundled_spam_path() -> Path:
    """Location of the packaged miniature spam/ham corpus."""
    return Path(resources.files("tann").joinpath("data", "mini_spam.tsv"))
