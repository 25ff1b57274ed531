"""Desk-scale instructor training.

A feature-linear keyword policy scores each add/remove candidate independently;
supervised initialization fits it to oracle ops with binary cross-entropy, then
REINFORCE with a moving-average baseline fine-tunes it on the editor-steered
reward f(S_edit) - f(S_init).
"""

from __future__ import annotations

import json
import logging
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .agents.roles import Editor, InstructorOutput, MockEditor
from .errors import EmptyTrainingSet
from .metrics import contains_keyword, heuristic_entities, keyword_tokens
from .oracle import build_keyword_oracle
from .pipeline import evaluate
from .report import RunReport
from .reward import Scorer
from .types import DatasetRecord, Instruction, KeywordOps, Origin, RewardWeights, Summary

log = logging.getLogger(__name__)

FEATURES = (
    "bias",
    "in_lead",
    "first_position",
    "doc_frequency",
    "initial_frequency",
    "length",
    "is_number",
)
ACTIONS = ("add", "remove")
CHECKPOINT_VERSION = 1
LEAD_SENTENCES = 3
RL_RECORD_CAP = 10_000


@dataclass(frozen=True)
class CandidateSet:
    add_candidates: tuple[str, ...]
    remove_candidates: tuple[str, ...]
    add_features: np.ndarray = field(repr=False)
    remove_features: np.ndarray = field(repr=False)

    def candidates(self, action: str) -> tuple[str, ...]:
        return self.add_candidates if action == "add" else self.remove_candidates

    def features(self, action: str) -> np.ndarray:
        return self.add_features if action == "add" else self.remove_features

    def labels(self, ops: KeywordOps) -> dict[str, np.ndarray]:
        """0/1 membership of each candidate in ``ops`` (normalized comparison)."""
        out = {}
        for action in ACTIONS:
            target = {" ".join(k.lower().split()) for k in getattr(ops, action)}
            out[action] = np.array([c in target for c in self.candidates(action)], dtype=float)
        return out


def _features(entity: str, doc_sentences: Sequence[str], initial_sentences: Sequence[str]) -> list[float]:
    hits = [i for i, s in enumerate(doc_sentences) if contains_keyword(s, entity)]
    n = len(doc_sentences)
    first = hits[0] / max(n - 1, 1) if hits else 1.0
    init_hits = sum(contains_keyword(s, entity) for s in initial_sentences)
    return [
        1.0,
        1.0 if hits and hits[0] < LEAD_SENTENCES else 0.0,
        first,
        min(len(hits), 5) / 5,
        init_hits / max(len(initial_sentences), 1),
        min(len(keyword_tokens(entity)), 6) / 6,
        1.0 if entity[:1].isdigit() else 0.0,
    ]


def enumerate_candidates(record: DatasetRecord, max_per_type: int = 32) -> CandidateSet:
    """Add candidates: document entities missing from the initial summary. Remove
    candidates: initial-summary entities. Both in first-occurrence order, capped."""
    doc_entities = heuristic_entities(record.document.text)
    initial_entities = heuristic_entities(record.initial.text)
    initial_set = set(initial_entities)
    add = tuple(e for e in doc_entities if e not in initial_set)[:max_per_type]
    remove = tuple(initial_entities)[:max_per_type]
    doc_sents, init_sents = record.document.sentences, record.initial.sentences

    def matrix(entities: Sequence[str]) -> np.ndarray:
        rows = [_features(e, doc_sents, init_sents) for e in entities]
        return np.array(rows, dtype=float).reshape(len(entities), len(FEATURES))

    return CandidateSet(add, remove, matrix(add), matrix(remove))


@dataclass
class KeywordPolicy:
    add_weights: np.ndarray
    remove_weights: np.ndarray
    temperature: float = 1.0
    feature_names: tuple[str, ...] = FEATURES

    def __post_init__(self) -> None:
        self.add_weights = np.asarray(self.add_weights, dtype=float)
        self.remove_weights = np.asarray(self.remove_weights, dtype=float)
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if not (np.all(np.isfinite(self.add_weights)) and np.all(np.isfinite(self.remove_weights))):
            raise ValueError("policy weights must be finite")

    @classmethod
    def zeros(cls, temperature: float = 1.0) -> KeywordPolicy:
        return cls(np.zeros(len(FEATURES)), np.zeros(len(FEATURES)), temperature)

    def weights(self, action: str) -> np.ndarray:
        return self.add_weights if action == "add" else self.remove_weights

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.add_weights, self.remove_weights])

    def with_flat(self, flat: np.ndarray) -> KeywordPolicy:
        d = len(self.add_weights)
        return KeywordPolicy(flat[:d].copy(), flat[d:].copy(), self.temperature, self.feature_names)

    def copy(self) -> KeywordPolicy:
        return self.with_flat(self.flat)

    def logits(self, cands: CandidateSet, action: str) -> np.ndarray:
        return cands.features(action) @ self.weights(action) / self.temperature

    def greedy(self, cands: CandidateSet) -> KeywordOps:
        """Temperature -> 0 limit: select exactly the candidates with positive logit."""
        chosen = {a: [c for c, z in zip(cands.candidates(a), self.logits(cands, a)) if z > 0] for a in ACTIONS}
        return KeywordOps(tuple(chosen["add"]), tuple(chosen["remove"]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": CHECKPOINT_VERSION,
            "feature_schema": list(self.feature_names),
            "temperature": self.temperature,
            "weights": {"add": self.add_weights.tolist(), "remove": self.remove_weights.tolist()},
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> KeywordPolicy:
        if d.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {d.get('version')!r}")
        schema = tuple(d["feature_schema"])
        if schema != FEATURES:
            raise ValueError(f"checkpoint feature schema {schema} does not match {FEATURES}")
        return cls(np.array(d["weights"]["add"]), np.array(d["weights"]["remove"]), float(d["temperature"]), schema)


def save_policy(policy: KeywordPolicy, path: str | Path) -> None:
    Path(path).write_text(json.dumps(policy.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_policy(path: str | Path) -> KeywordPolicy:
    return KeywordPolicy.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _log_sigmoid(z: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -z)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(_log_sigmoid(z))


def log_prob(policy: KeywordPolicy, cands: CandidateSet, selected: dict[str, np.ndarray]) -> float:
    """Joint log-probability of independent Bernoulli selections."""
    total = 0.0
    for action in ACTIONS:
        z = policy.logits(cands, action)
        y = selected[action]
        total += float(np.sum(y * _log_sigmoid(z) + (1 - y) * _log_sigmoid(-z)))
    return total


def grad_log_prob(policy: KeywordPolicy, cands: CandidateSet, selected: dict[str, np.ndarray]) -> np.ndarray:
    """Gradient of :func:`log_prob` w.r.t. the flattened weights."""
    parts = []
    for action in ACTIONS:
        x = cands.features(action)
        p = _sigmoid(policy.logits(cands, action))
        parts.append(x.T @ (selected[action] - p) / policy.temperature)
    return np.concatenate(parts)


def _sample_mask(policy: KeywordPolicy, cands: CandidateSet, rng: np.random.Generator) -> dict[str, np.ndarray]:
    mask = {}
    for action in ACTIONS:
        p = _sigmoid(policy.logits(cands, action))
        mask[action] = (rng.random(len(p)) < p).astype(float)
    return mask


def _ops_from_mask(cands: CandidateSet, mask: dict[str, np.ndarray]) -> KeywordOps:
    return KeywordOps(
        tuple(c for c, m in zip(cands.add_candidates, mask["add"]) if m),
        tuple(c for c, m in zip(cands.remove_candidates, mask["remove"]) if m),
    )


def policy_sample(policy: KeywordPolicy, candidates: CandidateSet, rng_seed: int) -> tuple[KeywordOps, float]:
    """Sample ops (each candidate independently) and return their exact joint log-probability."""
    mask = _sample_mask(policy, candidates, np.random.default_rng(rng_seed))
    return _ops_from_mask(candidates, mask), log_prob(policy, candidates, mask)


# --- supervised phase --------------------------------------------------------


def _bce_and_grad(
    policy: KeywordPolicy, batch: Sequence[tuple[CandidateSet, dict[str, np.ndarray]]]
) -> tuple[float, np.ndarray]:
    n = sum(len(c.add_candidates) + len(c.remove_candidates) for c, _ in batch)
    if n == 0:
        return 0.0, np.zeros_like(policy.flat)
    loss = 0.0
    grad = np.zeros_like(policy.flat)
    for cands, labels in batch:
        loss -= log_prob(policy, cands, labels)
        grad -= grad_log_prob(policy, cands, labels)
    return loss / n, grad / n


def supervised_fit(
    policy: KeywordPolicy,
    examples: Sequence[tuple[CandidateSet, KeywordOps]],
    epochs: int = 50,
    lr: float = 1.0,
    max_halvings: int = 30,
) -> tuple[KeywordPolicy, list[float]]:
    """Full-batch gradient descent on per-candidate binary cross-entropy.

    A step that would raise the training loss is retried with half the step size,
    so the returned loss curve (initial loss first, then one entry per epoch) is
    nonincreasing.
    """
    if not examples:
        raise EmptyTrainingSet("supervised_fit needs at least one example")
    if lr < 0:
        raise ValueError("lr must be >= 0")
    batch = [(c, c.labels(ops)) for c, ops in examples]
    current = policy.copy()
    loss, grad = _bce_and_grad(current, batch)
    curve = [loss]
    for _ in range(epochs):
        step = lr
        for _ in range(max_halvings + 1):
            if step == 0:
                break
            trial = current.with_flat(current.flat - step * grad)
            trial_loss, trial_grad = _bce_and_grad(trial, batch)
            if trial_loss <= loss:
                current, loss, grad = trial, trial_loss, trial_grad
                break
            step /= 2
        curve.append(loss)
    return current, curve


def oracle_examples(dataset: Sequence[DatasetRecord], max_per_type: int = 32) -> list[tuple[CandidateSet, KeywordOps]]:
    return [
        (enumerate_candidates(r, max_per_type), build_keyword_oracle(r.initial, r.reference, r.document))
        for r in dataset
    ]


# --- editor-steered RL -------------------------------------------------------


@dataclass(frozen=True)
class TrainStep:
    episode: int
    record_id: str
    sampled_ops: KeywordOps
    reward: float
    baseline: float
    loss: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "episode": self.episode,
            "record_id": self.record_id,
            "sampled_ops": self.sampled_ops.to_dict(),
            "reward": self.reward,
            "baseline": self.baseline,
            "loss": self.loss,
        }


def _scorer(scoring: Scorer | RewardWeights | None) -> Scorer:
    if isinstance(scoring, Scorer):
        return scoring
    return Scorer(weights=scoring or RewardWeights())


def reinforce_train(
    policy: KeywordPolicy,
    dataset: Sequence[DatasetRecord],
    editor: Editor | None = None,
    scoring: Scorer | RewardWeights | None = None,
    episodes: int = 2000,
    lr: float = 0.5,
    seed: int = 0,
    *,
    baseline_window: int = 100,
    max_per_type: int = 32,
    max_records: int = RL_RECORD_CAP,
    start_episode: int = 1,
) -> tuple[KeywordPolicy, list[TrainStep]]:
    """REINFORCE with a moving-average baseline.

    Each episode samples a record and a set of ops, lets the editor apply the
    rendered instruction, and updates ``w += lr * (reward - baseline) * grad log p``.
    The baseline is the mean of the previous ``baseline_window`` rewards (0 at start).
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if not dataset:
        raise EmptyTrainingSet("reinforce_train needs at least one record")
    editor = editor or MockEditor()
    scorer = _scorer(scoring)
    records = list(dataset)[:max_records]
    rng = np.random.default_rng(seed)
    cands_cache: dict[int, CandidateSet] = {}
    before_cache: dict[int, float] = {}
    window: deque[float] = deque(maxlen=baseline_window)
    current = policy.copy()
    steps: list[TrainStep] = []

    for episode in range(start_episode, start_episode + episodes):
        idx = int(rng.integers(len(records)))
        sample_seed = int(rng.integers(2**63 - 1))
        record = records[idx]
        if idx not in cands_cache:
            cands_cache[idx] = enumerate_candidates(record, max_per_type)
            before_cache[idx] = scorer.score(record.initial, record.reference).f_value
        cands = cands_cache[idx]
        mask = _sample_mask(current, cands, np.random.default_rng(sample_seed))
        ops = _ops_from_mask(cands, mask)
        if ops.is_noop:
            edited = Summary(record.initial.text, Origin.EDITED)
        else:
            try:
                edited = editor.edit(record, Instruction.from_ops(ops)).summary
            except Exception as exc:
                log.warning("episode %d (record %s) skipped: %s", episode, record.id, exc)
                continue
        reward = scorer.score(edited, record.reference).f_value - before_cache[idx]
        baseline = float(np.mean(window)) if window else 0.0
        advantage = reward - baseline
        lp = log_prob(current, cands, mask)
        if advantage != 0.0:
            current = current.with_flat(current.flat + lr * advantage * grad_log_prob(current, cands, mask))
        window.append(reward)
        steps.append(TrainStep(episode, record.id, ops, reward, baseline, -advantage * lp))
    return current, steps


def write_steps(steps: Sequence[TrainStep], path: str | Path, append: bool = False) -> None:
    with Path(path).open("a" if append else "w", encoding="utf-8") as fh:
        for s in steps:
            fh.write(json.dumps(s.to_dict()) + "\n")


# --- evaluation --------------------------------------------------------------


class PolicyInstructor:
    """Greedy keyword policy exposed through the instructor contract."""

    name = "policy"

    def __init__(self, policy: KeywordPolicy, max_per_type: int = 32) -> None:
        self.policy = policy
        self.max_per_type = max_per_type

    def instruct(self, record: DatasetRecord, iteration: int = 1) -> InstructorOutput:
        ops = self.policy.greedy(enumerate_candidates(record, self.max_per_type))
        return InstructorOutput(Instruction.from_ops(ops), meta={"instructor": self.name})


def eval_policy(
    policy: KeywordPolicy,
    dataset: Sequence[DatasetRecord],
    editor: Editor | None = None,
    scoring: Scorer | RewardWeights | None = None,
    label: str = "Policy",
) -> RunReport:
    """Greedy ops per record, one full pipeline pass each, aggregated like a batch run."""
    _, report = evaluate(dataset, PolicyInstructor(policy), editor or MockEditor(), _scorer(scoring), label)
    return report
