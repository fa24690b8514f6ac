"""Training and evaluation orchestration shared by the CLI commands."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

import numpy as np

from .dataset import TARGETS, DatasetRecord
from .errors import TooFewRecords
from .features import (
    TfidfModel,
    Vocabulary,
    build_vocabulary,
    encode_sequence,
    invert_targets,
    tfidf_fit,
    tokenize,
    transform_targets,
)
from .io import load_model, save_model
from .regressors import (
    BaselineModel,
    ForestModel,
    ForestParams,
    RidgeModel,
    baseline_fit,
    baseline_predict,
    evaluate,
    forest_fit,
    forest_predict,
    ridge_fit,
    ridge_predict,
    shuffled_indices,
    split_dataset,
)
from .stats import scott_knott_esd
from .textcnn import CnnHyper, TextCnn

APPROACHES = ("baseline", "ridge", "forest", "textcnn")

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    seed: int = 7
    split: tuple[float, float, float] = (0.8, 0.1, 0.1)
    models: tuple[str, ...] = APPROACHES
    targets: tuple[str, ...] = TARGETS
    ridge_lambda: float = 1.0
    forest: ForestParams = dc_field(default_factory=ForestParams)
    cnn: CnnHyper = dc_field(default_factory=CnnHyper)
    max_len: int = 100

    def __post_init__(self) -> None:
        if any(r <= 0 for r in self.split) or abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError("split ratios must be positive and sum to 1")
        unknown = set(self.models) - set(APPROACHES)
        if unknown:
            raise ValueError(f"unknown models: {sorted(unknown)}")
        unknown = set(self.targets) - set(TARGETS)
        if unknown:
            raise ValueError(f"unknown targets: {sorted(unknown)}")


@dataclass
class CnnRegressor:
    """TextCNN plus the vocabulary that encodes its inputs."""

    network: TextCnn
    vocab: Vocabulary
    max_len: int

    def encode(self, messages: list[str]) -> list[list[int]]:
        return [encode_sequence(tokenize(m), self.vocab, self.max_len) for m in messages]

    def predict_log(self, messages: list[str]) -> np.ndarray:
        return self.network.predict_log(self.encode(messages))

    def get_state(self) -> dict:
        return {
            "network": self.network.get_state(),
            "vocab": dict(self.vocab.index),
            "max_len": self.max_len,
        }

    @classmethod
    def from_state(cls, state: dict) -> "CnnRegressor":
        return cls(
            network=TextCnn.from_state(state["network"]),
            vocab=Vocabulary(index=state["vocab"]),
            max_len=state["max_len"],
        )


@dataclass
class TrainedModels:
    """All fitted artifacts for one run."""

    config: RunConfig
    tfidf: Optional[TfidfModel] = None
    ridge: dict[str, RidgeModel] = dc_field(default_factory=dict)
    forest: dict[str, ForestModel] = dc_field(default_factory=dict)
    textcnn: dict[str, CnnRegressor] = dc_field(default_factory=dict)
    baseline: dict[str, BaselineModel] = dc_field(default_factory=dict)


def _target_matrix(records: list[DatasetRecord], targets: tuple[str, ...]) -> dict[str, np.ndarray]:
    return {
        t: np.array([r.target(t) for r in records], dtype=np.float64) for t in targets
    }


def split_records(records: list[DatasetRecord], config: RunConfig) -> tuple[list, list, list]:
    if len(records) < 10:
        raise TooFewRecords(f"need at least 10 records, got {len(records)}")
    if config.split == (0.8, 0.1, 0.1):
        return split_dataset(records, config.seed)
    order = shuffled_indices(len(records), config.seed)
    val_n = int(len(records) * config.split[1])
    test_n = int(len(records) * config.split[2])
    train_n = len(records) - val_n - test_n
    return (
        [records[i] for i in order[:train_n]],
        [records[i] for i in order[train_n : train_n + val_n]],
        [records[i] for i in order[train_n + val_n :]],
    )


def train_models(records: list[DatasetRecord], config: RunConfig) -> TrainedModels:
    """Fit the selected approaches per selected target on the train split."""
    train, _, _ = split_records(records, config)
    messages = [r.message for r in train]
    y_log = {t: transform_targets(v) for t, v in _target_matrix(train, config.targets).items()}
    out = TrainedModels(config=config)
    if "ridge" in config.models or "forest" in config.models:
        out.tfidf = tfidf_fit(messages)
        X = out.tfidf.transform(messages)
        for t in config.targets:
            if "ridge" in config.models:
                out.ridge[t] = ridge_fit(X, y_log[t], config.ridge_lambda)
            if "forest" in config.models:
                out.forest[t] = forest_fit(X, y_log[t], config.forest)
    if "textcnn" in config.models:
        vocab = build_vocabulary(messages)
        sequences = [encode_sequence(tokenize(m), vocab, config.max_len) for m in messages]
        for t in config.targets:
            network = TextCnn(vocab_size=vocab.size, hyper=config.cnn, task="regression")
            network.fit(sequences, y_log[t])
            out.textcnn[t] = CnnRegressor(network=network, vocab=vocab, max_len=config.max_len)
    if "baseline" in config.models:
        for t in config.targets:
            out.baseline[t] = baseline_fit(y_log[t])
    return out


def _predict_original(models: TrainedModels, approach: str, target: str, test_records: list[DatasetRecord], seed: int) -> np.ndarray:
    messages = [r.message for r in test_records]
    if approach == "ridge":
        X = models.tfidf.transform(messages)
        return invert_targets(ridge_predict(models.ridge[target], X))
    if approach == "forest":
        X = models.tfidf.transform(messages)
        return invert_targets(forest_predict(models.forest[target], X))
    if approach == "textcnn":
        return invert_targets(models.textcnn[target].predict_log(messages))
    if approach == "baseline":
        target_offset = TARGETS.index(target)
        return baseline_predict(models.baseline[target], len(test_records), seed + target_offset)
    raise ValueError(f"unknown approach {approach!r}")


def evaluate_models(records: list[DatasetRecord], models: TrainedModels) -> dict:
    """Per-target RMSE on the test split, in original space, with significance ranks."""
    config = models.config
    _, _, test = split_records(records, config)
    actuals = _target_matrix(test, config.targets)
    rmse: dict[str, dict[str, float]] = {a: {} for a in config.models}
    # ranks cluster per-instance absolute errors; squared errors are too
    # heavy-tailed for the effect-size merge to ever separate approaches
    abs_errors: dict[str, dict[str, list[float]]] = {t: {} for t in config.targets}
    for approach in config.models:
        for t in config.targets:
            predictions = _predict_original(models, approach, t, test, config.seed)
            rmse[approach][t] = evaluate(predictions, actuals[t])
            abs_errors[t][approach] = np.abs(actuals[t] - predictions).tolist()
    ranks = {
        t: scott_knott_esd(abs_errors[t]) for t in config.targets
    }
    average = {
        a: float(np.mean([rmse[a][t] for t in config.targets])) for a in config.models
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "n": len(test),
        "seed": config.seed,
        "targets": list(config.targets),
        "approaches": list(config.models),
        "rmse": {a: {t: rmse[a][t] for t in config.targets} for a in config.models},
        "average_rmse": average,
        "ranks": {t: {a: ranks[t][a] for a in config.models} for t in config.targets},
    }


# --- model directory persistence ---------------------------------------------


def save_models(models: TrainedModels, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    if models.tfidf is not None:
        path = directory / "tfidf.model"
        save_model(path, "tfidf", {
            "columns": models.tfidf.columns,
            "idf": models.tfidf.idf,
            "n_docs": models.tfidf.n_docs,
        })
        written.append(path)
    for target, model in models.ridge.items():
        path = directory / f"ridge_{target}.model"
        save_model(path, "ridge", model.get_state())
        written.append(path)
    for target, model in models.forest.items():
        path = directory / f"forest_{target}.model"
        save_model(path, "forest", model.get_state())
        written.append(path)
    for target, model in models.textcnn.items():
        path = directory / f"textcnn_{target}.model"
        save_model(path, "textcnn", model.get_state())
        written.append(path)
    for target, model in models.baseline.items():
        path = directory / f"baseline_{target}.model"
        save_model(path, "baseline", model.get_state())
        written.append(path)
    return written


def load_models(directory: str | Path, config: RunConfig) -> TrainedModels:
    directory = Path(directory)
    out = TrainedModels(config=config)
    tfidf_path = directory / "tfidf.model"
    if tfidf_path.exists():
        _, state = load_model(tfidf_path)
        out.tfidf = TfidfModel(
            columns=state["columns"],
            idf=np.asarray(state["idf"], dtype=np.float64),
            n_docs=state["n_docs"],
        )
    loaders = {
        "ridge": (out.ridge, RidgeModel.from_state),
        "forest": (out.forest, ForestModel.from_state),
        "textcnn": (out.textcnn, CnnRegressor.from_state),
        "baseline": (out.baseline, BaselineModel.from_state),
    }
    for path in sorted(directory.glob("*.model")):
        if path.name == "tfidf.model":
            continue
        kind, _, target = path.stem.partition("_")
        if kind in loaders and target:
            _, state = load_model(path)
            store, factory = loaders[kind]
            store[target] = factory(state)
    return out
