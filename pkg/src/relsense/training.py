"""Training loop, evaluation with the either-sense credit rule, the
most-common-class baseline, and cross-model error overlap."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .corpus import RelationInstance, SenseInventory
from .errors import DivergenceError
from .nn import Adam, make_rng, multiclass_hinge, softmax_nll

LOSSES = ("nll", "hinge")


@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    dropout: float = 0.35
    batch_size: int = 64
    max_epochs: int = 50
    patience: int = 10
    seed: int = 0
    loss: str = "nll"
    hinge_margin: float = 1.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}, got {self.loss!r}")


@dataclass
class InstanceResult:
    id: str
    gold: tuple[str, ...]
    predicted: str
    correct: bool


@dataclass
class EvalReport:
    """Accuracy under the credit rule plus per-instance records."""

    accuracy: float
    results: list[InstanceResult]
    per_sense: dict[str, dict[str, int]] = field(default_factory=dict)
    never_predictable: tuple[str, ...] = ()

    @property
    def n_instances(self) -> int:
        return len(self.results)

    @property
    def n_correct(self) -> int:
        return sum(r.correct for r in self.results)

    def error_ids(self) -> set[str]:
        return {r.id for r in self.results if not r.correct}


def evaluate(classifier, instances: list[RelationInstance]) -> EvalReport:
    """Score a classifier: a prediction is correct iff it is a member of
    the instance's gold sense set. Instances keep their full sense sets.
    """
    if not instances:
        raise ValueError("cannot evaluate on an empty instance list")
    inventory = getattr(classifier, "inventory", None)
    results: list[InstanceResult] = []
    per_sense: dict[str, dict[str, int]] = {}

    def bucket(label: str) -> dict[str, int]:
        return per_sense.setdefault(label, {"gold": 0, "predicted": 0, "correct": 0})

    for inst in instances:
        predicted = classifier.predict(inst)
        correct = predicted in inst.senses
        results.append(InstanceResult(inst.id, tuple(inst.senses), predicted, correct))
        for sense in inst.senses:
            bucket(sense)["gold"] += 1
        bucket(predicted)["predicted"] += 1
        if correct:
            bucket(predicted)["correct"] += 1
    never: tuple[str, ...] = ()
    if inventory is not None:
        seen = {s for inst in instances for s in inst.senses}
        never = tuple(sorted(seen - set(inventory)))
    accuracy = sum(r.correct for r in results) / len(results)
    return EvalReport(accuracy, results, per_sense, never)


def _snapshot(params) -> list[np.ndarray]:
    return [p.data.copy() for p in params]


def _restore(params, snapshot) -> None:
    for p, data in zip(params, snapshot):
        p.data[...] = data


def train(model, train_pairs, dev_instances, config: TrainConfig) -> list[dict]:
    """Minimize the per-pair loss with Adam; keep the best-dev checkpoint.

    `train_pairs` is the multi-label-expanded list of (instance, gold
    sense index); the dev set stays unexpanded and is scored with the
    credit rule after every epoch. Training stops after `patience`
    epochs without a dev improvement or at `max_epochs`. The model is
    left holding the best-dev parameters.
    """
    if not train_pairs:
        raise ValueError("training set is empty")
    if not dev_instances:
        raise ValueError("dev set is empty")
    rng = make_rng(config.seed)
    model.dropout = config.dropout
    if config.loss == "nll":
        loss_fn = softmax_nll
    else:
        loss_fn = partial(multiclass_hinge, margin=config.hinge_margin)
    params = model.parameters()
    optimizer = Adam(params, learning_rate=config.learning_rate)
    history: list[dict] = []
    best_accuracy = -1.0
    best_params: list[np.ndarray] | None = None
    stale_epochs = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_pairs))
        total_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            optimizer.zero_grad()
            inv_batch = 1.0 / len(batch)
            for idx in batch:
                instance, gold = train_pairs[idx]
                logits, cache = model.forward(instance, training=True, rng=rng)
                loss, dlogits = loss_fn(logits, gold)
                total_loss += loss
                model.backward(dlogits * dlogits.dtype.type(inv_batch), cache)
            optimizer.step()
        mean_loss = total_loss / len(train_pairs)
        if not math.isfinite(mean_loss):
            raise DivergenceError(f"non-finite training loss at epoch {epoch}")
        dev_accuracy = evaluate(model, dev_instances).accuracy
        history.append({"epoch": epoch, "loss": mean_loss, "dev_accuracy": dev_accuracy})
        if dev_accuracy > best_accuracy:
            best_accuracy = dev_accuracy
            best_params = _snapshot(params)
            stale_epochs = 0
        else:
            stale_epochs += 1
            if stale_epochs >= config.patience:
                break
    if best_params is not None:
        _restore(params, best_params)
    return history


class ConstantSenseClassifier:
    """Predicts one fixed sense for every instance."""

    def __init__(self, label: str, inventory: SenseInventory):
        self.label = label
        self.inventory = inventory

    def predict(self, instance: RelationInstance) -> str:
        return self.label


def most_common_class(train_instances: list[RelationInstance],
                      inventory: SenseInventory) -> ConstantSenseClassifier:
    """Majority sense by training-pair frequency, ties to the lowest index."""
    if not train_instances:
        raise ValueError("training set is empty")
    counts = np.zeros(len(inventory), dtype=np.int64)
    for inst in train_instances:
        for sense in inst.senses:
            counts[inventory.index(sense)] += 1
    best = int(np.argmax(counts))
    return ConstantSenseClassifier(inventory.label(best), inventory)


@dataclass
class OverlapStats:
    shared_errors: int
    union_errors: int
    jaccard: float
    shared_ids: tuple[str, ...]


def error_overlap(report_a: EvalReport, report_b: EvalReport) -> OverlapStats:
    """Error-set intersection, union and Jaccard over matching reports.

    Two reports with no errors at all overlap perfectly: Jaccard is 1.
    """
    ids_a = {r.id for r in report_a.results}
    ids_b = {r.id for r in report_b.results}
    if ids_a != ids_b:
        raise ValueError("reports cover different instance sets")
    errors_a = report_a.error_ids()
    errors_b = report_b.error_ids()
    shared = errors_a & errors_b
    union = errors_a | errors_b
    jaccard = 1.0 if not union else len(shared) / len(union)
    return OverlapStats(len(shared), len(union), jaccard, tuple(sorted(shared)))


def write_report(report: EvalReport, json_path, tsv_path) -> None:
    """JSON summary plus TSV per-instance records."""
    summary = {
        "accuracy": report.accuracy,
        "n_instances": report.n_instances,
        "n_correct": report.n_correct,
        "per_sense": report.per_sense,
        "never_predictable": list(report.never_predictable),
        "results": [
            {"id": r.id, "gold": list(r.gold), "predicted": r.predicted,
             "correct": r.correct}
            for r in report.results
        ],
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("id\tgold\tpredicted\tcorrect\n")
        for r in report.results:
            fh.write(f"{r.id}\t{','.join(r.gold)}\t{r.predicted}\t{int(r.correct)}\n")


def read_report(json_path) -> EvalReport:
    with open(json_path, encoding="utf-8") as fh:
        summary = json.load(fh)
    results = [
        InstanceResult(item["id"], tuple(item["gold"]), item["predicted"],
                       bool(item["correct"]))
        for item in summary["results"]
    ]
    return EvalReport(summary["accuracy"], results, summary.get("per_sense", {}),
                      tuple(summary.get("never_predictable", ())))


def write_history(history: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "dev_accuracy"])
        for row in history:
            writer.writerow([row["epoch"], repr(row["loss"]), repr(row["dev_accuracy"])])
