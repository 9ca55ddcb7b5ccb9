"""Boosting engines for imbalanced two-class data.

`run_boosting` covers the resampling ensembles (plain reweighted resampling,
random under-sampling, synthetic minority over-sampling, random balance);
`pboost` is the progressive variant that feeds disjoint negative partitions
into a growing validation pool. Both accept either the classic weighted-error
loss or the F-measure loss factor, and both expose the same gated
retry/weight-update machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, normalize_weights, uniform_weights
from .errors import EmptyEnsemble, LengthMismatch, SingleClassInput, UndefinedMetric
from .metrics import ConfusionCounts, weighted_confusion
from .rng import RngStream
from .sampling import Partitioning, random_balance, smote, weighted_draw_without_replacement
from .svm import LearnerConfig, SvmModel, model_from_record, rbf_kappa_heuristic, train_svm, weighted_resample

_LOSS_CLAMP = 1e-10
DEFAULT_RETRY_CAP = 10

VARIANTS = ("ada", "rus", "smt", "rb")


@dataclass(frozen=True)
class WeightedError:
    """Classic loss factor: total weight of misclassified samples."""


@dataclass(frozen=True)
class FBetaLoss:
    """Loss factor 1 - F_beta computed from weighted confusion counts."""

    beta: float = 2.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")


LossFactor = WeightedError | FBetaLoss


@dataclass(frozen=True)
class IterationLog:
    n_tr: int
    n_val: int
    n_sv: int
    loss: float
    retries: int
    accepted: bool
    forced: bool = False


@dataclass(frozen=True)
class EnsembleMember:
    model: object
    alpha: float
    loss: float  # clamped loss the alpha was derived from

    @property
    def vote_weight(self) -> float:
        return math.log(1.0 / self.alpha)


@dataclass(frozen=True)
class BoostedEnsemble:
    members: tuple[EnsembleMember, ...]
    logs: tuple[IterationLog, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    def to_record(self) -> dict:
        return {
            "members": [
                {
                    "alpha": m.alpha,
                    "loss": m.loss,
                    "vote_weight": m.vote_weight,
                    "model": m.model.to_record(),
                }
                for m in self.members
            ],
            "logs": [vars(log) for log in self.logs],
        }


def ensemble_from_record(record: dict) -> BoostedEnsemble:
    members = tuple(
        EnsembleMember(
            model=model_from_record(m["model"]),
            alpha=float(m["alpha"]),
            loss=float(m["loss"]),
        )
        for m in record["members"]
    )
    logs = tuple(IterationLog(**log) for log in record["logs"])
    return BoostedEnsemble(members=members, logs=logs)


@dataclass(frozen=True)
class ComplexityReport:
    """Sample-count totals over the accepted iterations."""

    total_train: int
    total_val: int
    total_sv: int
    kernel_evals_design: int  # sum of n_sv * n_val
    ensemble_size: int
    discarded_attempts: int


def loss_fbeta(c: ConfusionCounts, beta: float) -> float:
    """1 - F_beta: (fp + b^2 fn) / ((1+b^2) tp + fp + b^2 fn)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    b2 = beta * beta
    denom = (1.0 + b2) * c.tp + c.fp + b2 * c.fn
    if denom <= 0.0:
        raise UndefinedMetric("loss undefined: no positives and no false positives")
    return (c.fp + b2 * c.fn) / denom


def l_b_bound(m_pos: int, m_neg: int, beta: float) -> float:
    """Loss of the predict-everything-positive baseline under unit weights.

    This replaces the 0.5 acceptance bound when the F-measure loss is used.
    """
    if m_pos < 1 or m_neg < 1:
        raise ValueError("both class counts must be at least 1")
    b2 = beta * beta
    return m_neg / ((1.0 + b2) * m_pos + m_neg)


def clamp_loss(loss: float) -> float:
    """Keep the loss inside (0, 1) so vote weights stay finite."""
    return min(max(loss, _LOSS_CLAMP), 1.0 - _LOSS_CLAMP)


def alpha_from_loss(loss: float) -> float:
    """loss / (1 - loss), with the loss clamped away from 0 and 1."""
    clamped = clamp_loss(loss)
    return clamped / (1.0 - clamped)


def update_weights(weights, true_labels, predicted_labels, alpha: float):
    """Scale each misclassified weight by alpha^1, correct ones by alpha^0,
    then renormalize. A zero-mistake iteration leaves weights unchanged."""
    w = np.asarray(weights, dtype=np.float64)
    y = np.asarray(true_labels)
    yhat = np.asarray(predicted_labels)
    if not (w.shape == y.shape == yhat.shape):
        raise LengthMismatch("weights, labels, and predictions must align")
    out = np.where(y == yhat, w, w * alpha)
    return normalize_weights(out)


def iteration_loss(counts: ConfusionCounts, loss_kind: LossFactor) -> float:
    if isinstance(loss_kind, FBetaLoss):
        return loss_fbeta(counts, loss_kind.beta)
    return counts.fp + counts.fn


def loss_bound(loss_kind: LossFactor, m_pos: int, m_neg: int) -> float:
    if isinstance(loss_kind, FBetaLoss):
        return l_b_bound(m_pos, m_neg, loss_kind.beta)
    return 0.5


def calibrate_loss(raw_loss: float, bound: float) -> float:
    """Map the loss so its acceptance bound lands on 1/2.

    The weight-update factor loss/(1 - loss) treats 1/2 as the
    zero-information point, which is right for the weighted error but not
    for the F-measure loss, whose trivial-classifier level is the bound
    itself. Rescaling by 0.5/bound re-anchors the factor so that every
    accepted member votes positively and weight updates stay contractive;
    the weighted-error path (bound exactly 1/2) is unaffected.
    """
    return raw_loss * (0.5 / bound)


def svm_learner(cfg: LearnerConfig | None = None):
    """Default base learner: RBF SVM with the distance-based width heuristic."""
    cfg = cfg or LearnerConfig()

    def train(features, labels, rng: RngStream) -> SvmModel:
        kappa = rbf_kappa_heuristic(features)
        return train_svm(features, labels, cfg, kappa, rng)

    return train


def _predict_labels(model, features: np.ndarray) -> np.ndarray:
    values = np.asarray(model.decision_function(features), dtype=np.float64)
    return np.where(values >= 0.0, 1, -1)


@dataclass
class _Attempt:
    model: object
    preds: np.ndarray
    loss: float
    n_tr: int
    n_sv: int


def _gated_attempts(run_attempt, bound: float, retry_cap: int):
    """Run attempts until one beats the loss bound (strict inequality).

    Returns (accepted attempt, discarded logs, forced flag). When every
    attempt is rejected the best-loss attempt is kept and flagged.
    """
    best: _Attempt | None = None
    discarded: list[_Attempt | None] = []
    for attempt_idx in range(retry_cap):
        try:
            attempt = run_attempt(attempt_idx)
        except SingleClassInput:
            discarded.append(None)
            continue
        if attempt.loss < bound:
            return attempt, discarded, False
        if best is None or attempt.loss < best.loss:
            if best is not None:
                discarded.append(best)
            best = attempt
        else:
            discarded.append(attempt)
    if best is None:
        raise SingleClassInput(
            "every resampling attempt produced a single-class training subset"
        )
    return best, discarded, True


def _build_subset(variant: str, train: Dataset, weights: np.ndarray, rng: RngStream) -> Dataset:
    if variant == "ada":
        return weighted_resample(train, weights, train.m, rng)
    if variant == "rus":
        n_draw = min(train.m_pos, train.m_neg)
        neg_idx = train.neg_indices
        picked = weighted_draw_without_replacement(
            neg_idx, weights[neg_idx], n_draw, rng
        )
        keep = np.concatenate([train.pos_indices, picked])
        return train.select(keep)
    if variant == "smt":
        n_synth = max(0, train.m_neg - train.m_pos)
        synth = smote(
            train.features[train.pos_indices], n_synth, 5, rng.child("smote")
        )
        feats = np.vstack([train.features, synth])
        labels = np.concatenate([train.labels, np.ones(n_synth, dtype=np.int64)])
        mean_pos_w = float(weights[train.pos_indices].mean())
        aug_w = np.concatenate([weights, np.full(n_synth, mean_pos_w)])
        augmented = Dataset(feats, labels)
        return weighted_resample(
            augmented, normalize_weights(aug_w), 2 * train.m_neg, rng.child("draw")
        )
    if variant == "rb":
        return random_balance(train, rng)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def run_boosting(
    variant: str,
    train: Dataset,
    n_rounds: int,
    cfg: LearnerConfig | None = None,
    loss_kind: LossFactor = WeightedError(),
    rng: RngStream = RngStream(0),
    *,
    learner=None,
    retry_cap: int = DEFAULT_RETRY_CAP,
) -> BoostedEnsemble:
    """Boost a weight-unaware base learner with per-variant resampling.

    Every iteration builds a training subset from the current weights, trains
    a base model, evaluates it on the full training set under the current
    weight vector, and rejects it (with retry) if its loss does not beat the
    bound: 0.5 for the weighted error, the always-positive baseline loss for
    the F-measure factor.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if n_rounds < 1:
        raise ValueError("n_rounds must be at least 1")
    if train.m_pos == 0 or train.m_neg == 0:
        raise SingleClassInput("training set must contain both classes")
    learner = learner or svm_learner(cfg)
    bound = loss_bound(loss_kind, train.m_pos, train.m_neg)

    weights = uniform_weights(train.m)
    members: list[EnsembleMember] = []
    logs: list[IterationLog] = []

    for e in range(n_rounds):
        def run_attempt(attempt_idx: int, _e=e, _weights=weights) -> _Attempt:
            stream = rng.child("iter", _e, "attempt", attempt_idx)
            subset = _build_subset(variant, train, _weights, stream.child("build"))
            model = learner(subset.features, subset.labels, stream.child("learn"))
            preds = _predict_labels(model, train.features)
            counts = weighted_confusion(train.labels, preds, _weights)
            return _Attempt(
                model=model,
                preds=preds,
                loss=iteration_loss(counts, loss_kind),
                n_tr=subset.m,
                n_sv=int(getattr(model, "n_sv", 0)),
            )

        accepted, discarded, forced = _gated_attempts(run_attempt, bound, retry_cap)
        for idx, attempt in enumerate(discarded):
            logs.append(
                IterationLog(
                    n_tr=0 if attempt is None else attempt.n_tr,
                    n_val=train.m,
                    n_sv=0 if attempt is None else attempt.n_sv,
                    loss=math.inf if attempt is None else attempt.loss,
                    retries=idx,
                    accepted=False,
                )
            )
        clamped = clamp_loss(accepted.loss)
        alpha = clamped / (1.0 - clamped)
        members.append(
            EnsembleMember(model=accepted.model, alpha=alpha, loss=clamped)
        )
        logs.append(
            IterationLog(
                n_tr=accepted.n_tr,
                n_val=train.m,
                n_sv=accepted.n_sv,
                loss=accepted.loss,
                retries=len(discarded),
                accepted=True,
                forced=forced,
            )
        )
        weights = update_weights(
            weights, train.labels, accepted.preds,
            alpha_from_loss(calibrate_loss(accepted.loss, bound)),
        )

    return BoostedEnsemble(members=tuple(members), logs=tuple(logs))


def pboost(
    train: Dataset,
    partitioning: Partitioning,
    cfg: LearnerConfig | None = None,
    beta: float = 2.0,
    rng: RngStream = RngStream(0),
    *,
    loss_kind: LossFactor | None = None,
    learner=None,
    retry_cap: int = DEFAULT_RETRY_CAP,
) -> BoostedEnsemble:
    """Progressive boosting over disjoint negative partitions.

    Iteration e inserts partition e into a temporary pool that starts with
    all positives, seeds the new samples with the running initial weight,
    trains on all positives plus a weight-driven draw of N_e pool negatives,
    and validates on the whole pool, whose imbalance grows monotonically.
    After each accepted iteration the initial weight for the next partition
    becomes the largest negative weight in the pool, so fresh samples compete
    on equal terms with the hardest ones seen so far.
    """
    if train.m_pos == 0 or train.m_neg == 0:
        raise SingleClassInput("training set must contain both classes")
    if not partitioning.covers(train.m_neg):
        raise ValueError("partitioning must cover exactly the training negatives")
    loss_kind = loss_kind if loss_kind is not None else FBetaLoss(beta)
    learner = learner or svm_learner(cfg)
    bound = loss_bound(loss_kind, train.m_pos, train.m_neg)

    pos_idx = train.pos_indices
    neg_idx = train.neg_indices
    pool_idx = pos_idx.copy()
    pool_w = np.ones(pos_idx.size)
    w_ini = 1.0
    members: list[EnsembleMember] = []
    logs: list[IterationLog] = []

    for e, part in enumerate(partitioning.parts):
        n_e = int(part.size)
        pool_idx = np.concatenate([pool_idx, neg_idx[part]])
        pool_w = normalize_weights(np.concatenate([pool_w, np.full(n_e, w_ini)]))
        pool_labels = train.labels[pool_idx]
        pool_features = train.features[pool_idx]
        neg_positions = np.flatnonzero(pool_labels == -1)

        def run_attempt(attempt_idx: int, _e=e, _w=pool_w) -> _Attempt:
            stream = rng.child("iter", _e, "attempt", attempt_idx)
            picked = weighted_draw_without_replacement(
                neg_positions, _w[neg_positions], n_e, stream.child("draw")
            )
            subset_rows = np.concatenate([pos_idx, pool_idx[picked]])
            model = learner(
                train.features[subset_rows],
                train.labels[subset_rows],
                stream.child("learn"),
            )
            preds = _predict_labels(model, pool_features)
            counts = weighted_confusion(pool_labels, preds, _w)
            return _Attempt(
                model=model,
                preds=preds,
                loss=iteration_loss(counts, loss_kind),
                n_tr=int(pos_idx.size) + n_e,
                n_sv=int(getattr(model, "n_sv", 0)),
            )

        accepted, discarded, forced = _gated_attempts(run_attempt, bound, retry_cap)
        for idx, attempt in enumerate(discarded):
            logs.append(
                IterationLog(
                    n_tr=0 if attempt is None else attempt.n_tr,
                    n_val=int(pool_idx.size),
                    n_sv=0 if attempt is None else attempt.n_sv,
                    loss=math.inf if attempt is None else attempt.loss,
                    retries=idx,
                    accepted=False,
                )
            )
        clamped = clamp_loss(accepted.loss)
        alpha = clamped / (1.0 - clamped)
        members.append(
            EnsembleMember(model=accepted.model, alpha=alpha, loss=clamped)
        )
        logs.append(
            IterationLog(
                n_tr=accepted.n_tr,
                n_val=int(pool_idx.size),
                n_sv=accepted.n_sv,
                loss=accepted.loss,
                retries=len(discarded),
                accepted=True,
                forced=forced,
            )
        )
        pool_w = update_weights(
            pool_w, pool_labels, accepted.preds,
            alpha_from_loss(calibrate_loss(accepted.loss, bound)),
        )
        w_ini = float(pool_w[neg_positions].max())

    return BoostedEnsemble(members=tuple(members), logs=tuple(logs))


def predict_scores(ensemble: BoostedEnsemble, features) -> np.ndarray:
    """Vote-weighted sum of member decision values for each row."""
    if not ensemble.members:
        raise EmptyEnsemble("cannot predict with an empty ensemble")
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    total = np.zeros(x.shape[0])
    for member in ensemble.members:
        total += member.vote_weight * np.asarray(member.model.decision_function(x))
    return total


def predict_score(ensemble: BoostedEnsemble, x) -> float:
    return float(predict_scores(ensemble, x)[0])


def predict_majority_labels(ensemble: BoostedEnsemble, features) -> np.ndarray:
    """Vote-weighted majority over member label decisions; ties go positive."""
    if not ensemble.members:
        raise EmptyEnsemble("cannot predict with an empty ensemble")
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    total = np.zeros(x.shape[0])
    for member in ensemble.members:
        votes = np.where(np.asarray(member.model.decision_function(x)) >= 0.0, 1.0, -1.0)
        total += member.vote_weight * votes
    return np.where(total >= 0.0, 1, -1)


def predict_majority(ensemble: BoostedEnsemble, x) -> int:
    return int(predict_majority_labels(ensemble, x)[0])


def complexity_report(ensemble: BoostedEnsemble) -> ComplexityReport:
    """Totals of the per-iteration sample counts for accepted members."""
    accepted = [log for log in ensemble.logs if log.accepted]
    discarded = len(ensemble.logs) - len(accepted)
    return ComplexityReport(
        total_train=sum(log.n_tr for log in accepted),
        total_val=sum(log.n_val for log in accepted),
        total_sv=sum(log.n_sv for log in accepted),
        kernel_evals_design=sum(log.n_sv * log.n_val for log in accepted),
        ensemble_size=len(accepted),
        discarded_attempts=discarded,
    )
