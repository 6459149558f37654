"""Randomized-trial evaluation protocol, sweeps and report serialization."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from . import classify
from .covariance import DomainDataset
from .dataio import resolve_domain
from .errors import ContractError, DataError
from .gca import Algorithm, HyperParams, fit

log = logging.getLogger(__name__)

OFFICE_DOMAINS = {"amazon": 20, "caltech": 20, "caltech10": 20, "webcam": 20, "dslr": 8}


@dataclass(frozen=True)
class TransferTask:
    source_name: str
    target_name: str
    trials: int = 30
    samples_per_class: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.source_name == self.target_name:
            raise ContractError("source and target domains must differ")
        if self.trials < 1:
            raise ContractError(f"trials must be >= 1, got {self.trials}")
        if self.samples_per_class is not None and self.samples_per_class < 1:
            raise ContractError("samples_per_class must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ContractError("seed must be a 64-bit unsigned integer")

    @property
    def label(self):
        return f"{self.source_name}->{self.target_name}"


def default_samples_per_class(source_name):
    """20 per class for Office-Caltech sources (8 for DSLR); otherwise all."""
    return OFFICE_DOMAINS.get(Path(str(source_name)).stem.lower())


@dataclass(frozen=True)
class EvalReport:
    """Accuracy (in percent) of one method and parameter set over trials."""

    task: TransferTask
    method: str
    params: HyperParams
    mean_accuracy: float
    std_accuracy: float
    per_trial: tuple
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_trials(cls, task, method, params, per_trial, metadata=None):
        acc = np.asarray(per_trial, dtype=float)
        std = float(np.std(acc, ddof=1)) if acc.size > 1 else 0.0
        return cls(task, str(method), params, float(np.mean(acc)), std,
                   tuple(float(a) for a in acc), dict(metadata or {}))

    def to_dict(self):
        return {
            "task": asdict(self.task),
            "method": self.method,
            "params": self.params.as_dict(),
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "per_trial": list(self.per_trial),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            TransferTask(**d["task"]),
            d["method"],
            HyperParams(**d["params"]),
            float(d["mean_accuracy"]),
            float(d["std_accuracy"]),
            tuple(float(x) for x in d["per_trial"]),
            dict(d.get("metadata", {})),
        )


def param_grid(t=(0.5,), gamma=(0.5,), mu=(1.0,), **fixed):
    """Cartesian product of t, gamma and mu values, sorted lexicographically."""
    return [
        HyperParams(t=a, gamma=b, mu=c, **fixed)
        for a, b, c in sorted(product(t, gamma, mu))
    ]


def sample_per_class(labels, per_class, rng):
    """Indices drawing ``per_class`` samples (or all, if fewer) from each class."""
    labels = np.asarray(labels)
    chosen = []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        take = min(per_class, idx.size)
        chosen.append(rng.choice(idx, size=take, replace=False))
    return np.sort(np.concatenate(chosen))


def trial_rng(seed, trial):
    # counter-based split: trial i's stream does not depend on the method list
    return np.random.default_rng([int(seed), int(trial)])


def _metadata(task, classifier, reg, spc):
    return {
        "scatter_normalization": "all unordered pairs, divided by n(n-1)/2",
        "baseline_covariance": "unbiased empirical covariance",
        "regularization": "M + eps * mean(diag M) * I",
        "adaptation_transform": "x -> A x on source; target unchanged",
        "classifier": classifier.value,
        "classifier_reg": reg,
        "standardization": "joint fit on sampled source + full target",
        "samples_per_class": "all" if spc is None else spc,
        "accuracy_units": "percent",
    }


def evaluate_trial(method, params, source, target, classifier, reg=1.0):
    """Adapt on one trial's data and return target accuracy in percent.

    Only the target's features reach the adaptation and training code.
    """
    unlabeled = target.without_labels()
    model = fit(method, source.features, unlabeled.features, params)
    Zs = model.transform_source(source.features)
    Zt = model.transform_target(unlabeled.features)
    clf = classify.train(classifier, Zs, source.labels, reg,
                         num_classes=source.num_classes)
    return 100.0 * classify.accuracy(classify.predict(clf, Zt), target.labels)


def run_protocol(task, methods, params_grid=None, *, source=None, target=None,
                 data_root=None, classifier="nearest_class_mean", reg=1.0):
    """Run ``task.trials`` randomized trials for each method and grid point.

    Per trial: sample a labelled source training set, standardize jointly
    with the full target, fit each method on source + unlabeled target,
    train the classifier on adapted source and score every target sample.
    Parameter-free baselines are evaluated once, with the first grid point.
    """
    if params_grid is None:
        params_grid = [HyperParams()]
    params_grid = list(params_grid)
    if not params_grid:
        raise ContractError("parameter grid is empty")
    methods = [Algorithm.parse(m) for m in methods]
    if not methods:
        raise ContractError("no methods given")
    classifier = classify.ClassifierKind.parse(classifier)
    if source is None:
        source = resolve_domain(task.source_name, data_root)
    if target is None:
        target = resolve_domain(task.target_name, data_root)
    if source.labels is None or target.labels is None:
        raise DataError("source and target need labels (target labels score only)")
    if source.dim != target.dim:
        raise DataError(f"source dim {source.dim} != target dim {target.dim}")
    k = max(source.num_classes, target.num_classes)
    source = DomainDataset(source.features, source.labels, source.domain_name, k)
    target = DomainDataset(target.features, target.labels, target.domain_name, k)

    spc = task.samples_per_class
    if spc is None:
        spc = default_samples_per_class(task.source_name)

    runs = [(m, p) for m in methods
            for p in (params_grid if m.is_spd else params_grid[:1])]
    scores = {run: [] for run in range(len(runs))}
    for trial in range(task.trials):
        rng = trial_rng(task.seed, trial)
        if spc is None:
            src = source
        else:
            src = source.subset(sample_per_class(source.labels, spc, rng))
        std = classify.fit_standardizer(np.vstack([src.features, target.features]))
        src_z, tgt_z = std.apply(src), std.apply(target)
        for i, (m, p) in enumerate(runs):
            scores[i].append(evaluate_trial(m, p, src_z, tgt_z, classifier, reg))
        log.debug("trial %d/%d done", trial + 1, task.trials)

    meta = _metadata(task, classifier, reg, spc)
    return [
        EvalReport.from_trials(task, m.value, p, scores[i], meta)
        for i, (m, p) in enumerate(runs)
    ]


def reaggregate(reports):
    """Recompute mean/std of each report from its per-trial values."""
    return [
        EvalReport.from_trials(r.task, r.method, r.params, r.per_trial, r.metadata)
        for r in reports
    ]


CSV_FIELDS = [
    "source", "target", "method", "t", "gamma", "mu", "k", "bandwidth",
    "sigma", "eps", "num_kept", "subspace_dim", "trials", "seed",
    "samples_per_class", "mean_accuracy", "std_accuracy", "per_trial",
]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def reports_to_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in reports:
        p = r.params
        w.writerow([_fmt(v) for v in (
            r.task.source_name, r.task.target_name, r.method, p.t, p.gamma, p.mu,
            p.k, p.bandwidth, p.sigma, p.eps, p.num_kept, p.subspace_dim,
            r.task.trials, r.task.seed, r.task.samples_per_class,
            r.mean_accuracy, r.std_accuracy,
        )] + [";".join(repr(a) for a in r.per_trial)])
    return buf.getvalue()


def reports_to_json(reports):
    payload = {"reports": [r.to_dict() for r in reports]}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def emit_report(reports, format="json", path=None):
    """Serialize reports deterministically; write to ``path`` when given."""
    if format == "json":
        text = reports_to_json(reports)
    elif format == "csv":
        text = reports_to_csv(reports)
    else:
        raise ContractError(f"unknown report format {format!r}")
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return text


def load_reports(path):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"report file not found: {path}")
    try:
        payload = json.loads(path.read_text())
        return [EvalReport.from_dict(d) for d in payload["reports"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: not a valid JSON report file ({exc})") from exc


@dataclass(frozen=True)
class SweepRow:
    task: str
    method: str
    t: float
    gamma: float
    mu: float
    mean_accuracy: float
    reference_method: str
    reference_accuracy: float
    improvement_pct: float


def percentage_improvement(acc, ref):
    if ref == 0:
        raise ContractError("reference accuracy is zero")
    return 100.0 * (acc - ref) / ref


def _best(reports):
    return min(reports, key=lambda r: (-r.mean_accuracy, r.params.t,
                                       r.params.gamma, r.params.mu))


def sweep_summary(reports, reference="CORAL"):
    """Best parameters per (task, method) and improvement over ``reference``.

    Best means highest mean accuracy, ties to the smallest ``(t, gamma, mu)``.
    """
    reference = Algorithm.parse(reference).value
    by_key = {}
    for r in reports:
        by_key.setdefault((r.task.label, r.method), []).append(r)
    tasks = sorted({k[0] for k in by_key})
    rows = []
    for task in tasks:
        if (task, reference) not in by_key:
            raise ContractError(f"reference method {reference} absent for task {task}")
        ref_acc = _best(by_key[(task, reference)]).mean_accuracy
        for (tk, method), group in sorted(by_key.items()):
            if tk != task:
                continue
            b = _best(group)
            rows.append(SweepRow(
                task, method, b.params.t, b.params.gamma, b.params.mu,
                b.mean_accuracy, reference, ref_acc,
                percentage_improvement(b.mean_accuracy, ref_acc),
            ))
    return rows


def summary_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = list(SweepRow.__dataclass_fields__)
    w.writerow(names)
    for row in rows:
        w.writerow([_fmt(getattr(row, n)) for n in names])
    return buf.getvalue()
