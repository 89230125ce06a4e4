"""Training and evaluation over generated dataset manifests."""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from .data import Manifest, item_groups, load_arrays, split_by_group, split_indices
from .models import build_model


@dataclass
class TrainConfig:
    manifests: list[str]
    out_csv: str | None = None
    network: str = "small-cnn"
    epochs: int = 10
    batch_size: int = 64
    learning_rate: float = 1e-3
    lr_step_epochs: int = 0  # halve the rate every N epochs when > 0
    train_fraction: float = 0.9
    input_size: int = 128
    seed: int = 0
    split_by: str = "item"
    shuffle_labels: bool = False
    device: str = "cpu"
    verify_hashes: bool = True


@dataclass
class AccuracyReport:
    """Held-out accuracy per manifest plus training metadata."""

    rows: list[dict] = dc_field(default_factory=list)

    def accuracies(self) -> list[float]:
        return [r["accuracy"] for r in self.rows]

    def to_json(self) -> str:
        return json.dumps({"rows": self.rows}, indent=2, sort_keys=True) + "\n"


def _format_csv(rows: list[tuple]) -> str:
    lines = ["l_c_m,accuracy"]
    for l_c, acc in rows:
        l_c_txt = f"{float(l_c):.9g}" if l_c is not None else ""
        lines.append(f"{l_c_txt},{float(acc):.9g}")
    return "\n".join(lines) + "\n"


def _train_one(images: np.ndarray, labels: np.ndarray, num_classes: int,
               config: TrainConfig,
               groups: np.ndarray | None = None) -> tuple[float, np.ndarray, float]:
    torch.manual_seed(config.seed)
    device = torch.device(config.device)
    if config.split_by == "object":
        if groups is None:
            raise ValueError("object split needs group assignments")
        train_idx, test_idx = split_by_group(groups, config.train_fraction,
                                             config.seed)
    else:
        train_idx, test_idx = split_indices(len(images), config.train_fraction,
                                            config.seed)
    y = labels.copy()
    if config.shuffle_labels:
        rng = np.random.default_rng(config.seed + 1)
        y[train_idx] = rng.permutation(y[train_idx])

    x = torch.from_numpy(images).unsqueeze(1)
    y_t = torch.from_numpy(y)
    model = build_model(config.network, num_classes, config.input_size).to(device)
    opt = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    scheduler = None
    if config.lr_step_epochs > 0:
        scheduler = torch.optim.lr_scheduler.StepLR(opt, config.lr_step_epochs, gamma=0.5)
    loss_fn = nn.CrossEntropyLoss()

    order_rng = np.random.default_rng(config.seed + 2)
    model.train()
    train_acc = 0.0
    for _epoch in range(config.epochs):
        order = order_rng.permutation(train_idx)
        correct = 0
        for start in range(0, len(order), config.batch_size):
            sel = order[start:start + config.batch_size]
            xb = x[sel].to(device)
            yb = y_t[sel].to(device)
            opt.zero_grad()
            out = model(xb)
            loss = loss_fn(out, yb)
            loss.backward()
            opt.step()
            correct += int((out.argmax(dim=1) == yb).sum())
        train_acc = correct / len(order)
        if scheduler is not None:
            scheduler.step()

    model.eval()
    confusion = np.zeros((num_classes, num_classes), dtype=np.int64)
    correct = 0
    with torch.no_grad():
        for start in range(0, len(test_idx), config.batch_size):
            sel = test_idx[start:start + config.batch_size]
            out = model(x[sel].to(device))
            pred = out.argmax(dim=1).cpu().numpy()
            truth = labels[sel]
            correct += int((pred == truth).sum())
            for t, p in zip(truth, pred):
                confusion[t, p] += 1
    return correct / len(test_idx), confusion, train_acc


def train_eval(config: TrainConfig) -> AccuracyReport:
    """Train the selected network independently per manifest and evaluate
    held-out accuracy; writes an accuracy CSV compatible with the
    simulator's plot command when out_csv is set."""
    report = AccuracyReport()
    csv_rows = []
    for mpath in config.manifests:
        manifest = Manifest.load(mpath)
        images, labels = load_arrays(manifest, config.input_size,
                                     verify=config.verify_hashes)
        num_classes = int(labels.max()) + 1
        groups = item_groups(manifest) if config.split_by == "object" else None
        accuracy, confusion, train_acc = _train_one(images, labels, num_classes, config,
                                                    groups=groups)
        chance = 1.0 / num_classes
        row = {
            "manifest": str(mpath),
            "l_c": manifest.l_c,
            "taxonomy": manifest.taxonomy,
            "num_items": len(images),
            "num_classes": num_classes,
            "accuracy": accuracy,
            "train_accuracy": train_acc,
            "confusion": confusion.tolist(),
            "converged": train_acc >= chance + 0.05,
            "network": config.network,
            "epochs": config.epochs,
            "input_size": config.input_size,
            "seed": config.seed,
            "shuffle_labels": config.shuffle_labels,
        }
        report.rows.append(row)
        csv_rows.append((manifest.l_c, accuracy))
    if config.out_csv:
        csv_rows.sort(key=lambda r: (r[0] is None, r[0]))
        Path(config.out_csv).write_text(_format_csv(csv_rows), encoding="utf-8")
    return report
