"""Label commit messages as self-admitted technical debt and assign a debt type."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DegenerateCorpus
from .features import Vocabulary, build_vocabulary, encode_sequence, tokenize
from .textcnn import CnnHyper, TextCnn

CODE_DESIGN = "CodeDesign"
REQUIREMENT = "Requirement"
DOCUMENTATION = "Documentation"
TEST = "Test"

#: Pattern lists are consulted in this order; the first match wins.
TYPE_PRIORITY = (TEST, DOCUMENTATION, REQUIREMENT, CODE_DESIGN)

#: Fixed class order for the classifier head; argmax ties resolve to the earliest.
CLASS_ORDER = ("NonSATD", CODE_DESIGN, DOCUMENTATION, REQUIREMENT, TEST)

_FILE_TYPE_NAMES = {
    "test": TEST,
    "documentation": DOCUMENTATION,
    "requirement": REQUIREMENT,
    "code_design": CODE_DESIGN,
}

SOURCE_RULE = "Rule"
SOURCE_MODEL = "Model"


@dataclass(frozen=True)
class SatdLabel:
    is_satd: bool
    debt_type: Optional[str] = None
    source: str = SOURCE_RULE

    def __post_init__(self) -> None:
        if self.is_satd and self.debt_type is None:
            raise ValueError("SATD labels need a debt type")
        if not self.is_satd and self.debt_type is not None:
            raise ValueError("non-SATD labels cannot carry a debt type")


def load_patterns(path: str | Path | None = None) -> dict[str, list[tuple[str, ...]]]:
    """Read `type<TAB>pattern` lines into tokenized phrase lists per debt type."""
    if path is None:
        text = resources.files("presti").joinpath("data/satd_patterns.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    patterns: dict[str, list[tuple[str, ...]]] = {t: [] for t in TYPE_PRIORITY}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, phrase = line.partition("\t")
        debt_type = _FILE_TYPE_NAMES.get(kind.strip().lower())
        if debt_type is None:
            continue
        tokens = tuple(tokenize(phrase))
        if tokens:
            patterns[debt_type].append(tokens)
    return patterns


_DEFAULT_PATTERNS: dict[str, list[tuple[str, ...]]] | None = None


def _default_patterns() -> dict[str, list[tuple[str, ...]]]:
    global _DEFAULT_PATTERNS
    if _DEFAULT_PATTERNS is None:
        _DEFAULT_PATTERNS = load_patterns()
    return _DEFAULT_PATTERNS


def _phrase_in(tokens: list[str], phrase: tuple[str, ...]) -> bool:
    if len(phrase) > len(tokens):
        return False
    if len(phrase) == 1:
        return phrase[0] in tokens
    for i in range(len(tokens) - len(phrase) + 1):
        if tuple(tokens[i : i + len(phrase)]) == phrase:
            return True
    return False


def rule_detect(
    message: str, patterns: dict[str, list[tuple[str, ...]]] | None = None
) -> SatdLabel:
    """Pattern-list detection; deterministic and total."""
    patterns = patterns or _default_patterns()
    tokens = tokenize(message)
    for debt_type in TYPE_PRIORITY:
        for phrase in patterns.get(debt_type, []):
            if _phrase_in(tokens, phrase):
                return SatdLabel(is_satd=True, debt_type=debt_type, source=SOURCE_RULE)
    return SatdLabel(is_satd=False, source=SOURCE_RULE)


@dataclass
class SatdModel:
    """Trained message classifier over the five SATD classes."""

    network: TextCnn
    vocab: Vocabulary
    max_len: int = 100


def _label_to_class(label: SatdLabel) -> int:
    if not label.is_satd:
        return 0
    return CLASS_ORDER.index(label.debt_type)


def _class_to_label(cls: int) -> SatdLabel:
    if cls == 0:
        return SatdLabel(is_satd=False, source=SOURCE_MODEL)
    return SatdLabel(is_satd=True, debt_type=CLASS_ORDER[cls], source=SOURCE_MODEL)


def train_satd_classifier(
    corpus: list[tuple[str, SatdLabel]],
    hyper: CnnHyper | None = None,
    max_len: int = 100,
) -> SatdModel:
    """Fit the shared convolutional body with a classification head."""
    hyper = hyper or CnnHyper()
    classes = [_label_to_class(label) for _, label in corpus]
    if len(set(classes)) < 2:
        raise DegenerateCorpus("training corpus contains a single class")
    messages = [m for m, _ in corpus]
    vocab = build_vocabulary(messages)
    sequences = [encode_sequence(tokenize(m), vocab, max_len) for m in messages]
    network = TextCnn(
        vocab_size=vocab.size,
        hyper=hyper,
        n_outputs=len(CLASS_ORDER),
        task="classification",
    )
    network.fit(sequences, np.array(classes, dtype=np.int64))
    return SatdModel(network=network, vocab=vocab, max_len=max_len)


def model_detect(model: SatdModel, message: str) -> SatdLabel:
    """Argmax over class scores; empty messages fall back to NonSATD."""
    tokens = tokenize(message)
    if not tokens:
        return SatdLabel(is_satd=False, source=SOURCE_MODEL)
    sequence = encode_sequence(tokens, model.vocab, model.max_len)
    scores = model.network.predict_scores([sequence])[0]
    return _class_to_label(int(np.argmax(scores)))
