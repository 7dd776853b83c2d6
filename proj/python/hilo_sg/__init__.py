"""Python front end of the hilo-sg core.

Datasets, predictions and reports are plain dicts/lists in the same JSON
layout the ``hilo`` command-line tool uses.
"""
import json

from . import _core
from ._core import ALL, HiloError, hilo_distance, relation_consistency, rie

__all__ = [
    "ALL",
    "HiloError",
    "augment",
    "evaluate",
    "fuse",
    "gradcheck",
    "hilo_distance",
    "hungarian",
    "pair_scores",
    "predict",
    "relation_consistency",
    "rie",
    "swap",
    "synthesize",
    "train",
]


def _dump(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def hungarian(cost):
    """Returns (pairs, unmatched): (query, gt) pairs sorted by query."""
    pairs, unmatched = _core.hungarian([list(map(float, row)) for row in cost])
    return [tuple(p) for p in pairs], list(unmatched)


def synthesize(config=None):
    return json.loads(_core.synthesize(_dump(config or {})))


def pair_scores(dataset, seed=0):
    return json.loads(_core.pair_scores(_dump(dataset), seed))


def augment(dataset, scores):
    return json.loads(_core.augment(_dump(dataset), _dump(scores)))


def swap(dataset, direction="hl", mode="adjacent"):
    return json.loads(_core.swap(_dump(dataset), direction, mode))


def fuse(hl, lh, iou_thr=0.5):
    return json.loads(_core.fuse(_dump(hl), _dump(lh), iou_thr))


def evaluate(gt, preds, ks=(20, 50, 100), iou_thr=0.5):
    return json.loads(_core.evaluate(_dump(gt), _dump(preds), list(ks), iou_thr))


def train(dataset, config=None):
    """Returns (model, trace) with trace as a list of row dicts."""
    model, csv = _core.train(_dump(dataset), _dump(config or {}))
    lines = csv.strip().splitlines()
    header = lines[0].split(",")
    trace = [dict(zip(header, map(float, line.split(",")))) for line in lines[1:]]
    for row in trace:
        row["step"] = int(row["step"])
    return json.loads(model), trace


def predict(model, dataset, mode="fused"):
    return json.loads(_core.predict(_dump(model), _dump(dataset), mode))


def gradcheck(instances=100, seed=0):
    return [
        {"kernel": k, "max_rel_error": e, "passed": ok}
        for k, e, ok in _core.gradcheck(instances, seed)
    ]
