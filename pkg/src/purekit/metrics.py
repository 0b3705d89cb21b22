"""Robustness metrics over per-example attack records.

A record says whether the victim classified the example correctly before the
attack, whether the attack then flipped it (defined only for
originally-correct examples), and how many queries the attacker spent. The
summary metrics follow the usual robustness-benchmark conventions:

* acc  - clean accuracy, percent of examples classified correctly
* aua  - accuracy under attack, percent still correct after the episode
* asr  - attack success rate, percent of originally-correct examples flipped
* avgq - mean attacker queries over attacked examples
* pdr  - performance drop rate, 100 * (acc - aua) / acc
* apdr - mean pdr across attacks

When every originally-correct example is attacked exactly once, pdr and asr
coincide; the test suite checks that identity against published benchmark
tables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    DuplicateId,
    EmptyList,
    EmptyRecords,
    InvalidRecord,
    IoFailure,
    NoAttackedExamples,
    UnknownAttack,
    ValidationError,
    ZeroAccuracy,
)


@dataclass(frozen=True)
class AttackRecord:
    """Outcome of one attack episode against one example.

    ``attack_succeeded`` must be present exactly when ``originally_correct``
    is true: attackers only target examples the model got right. A correct
    example the attacker gave up on counts as ``attack_succeeded=False``.
    """

    example_id: str
    originally_correct: bool
    attack_succeeded: bool | None
    queries_used: int
    attack_name: str

    def __post_init__(self) -> None:
        if self.originally_correct and self.attack_succeeded is None:
            raise InvalidRecord(
                f"record {self.example_id!r}: attack_succeeded required when originally_correct"
            )
        if not self.originally_correct and self.attack_succeeded is not None:
            raise InvalidRecord(
                f"record {self.example_id!r}: attack_succeeded must be absent when not originally_correct"
            )
        if self.queries_used < 0:
            raise InvalidRecord(f"record {self.example_id!r}: queries_used must be >= 0")


def clean_accuracy(records) -> float:
    """Percent of records whose example was classified correctly pre-attack."""
    records = list(records)
    if not records:
        raise EmptyRecords("clean_accuracy of an empty record set")
    return 100.0 * sum(r.originally_correct for r in records) / len(records)


def _attack_subset(records, attack: str) -> list[AttackRecord]:
    records = list(records)
    if not records:
        raise EmptyRecords("empty record set")
    subset = [r for r in records if r.attack_name == attack]
    if not subset:
        known = sorted({r.attack_name for r in records})
        raise UnknownAttack(f"no records for attack {attack!r}; known: {known}")
    return subset


def accuracy_under_attack(records, attack: str) -> float:
    """Percent of this attack's records still classified correctly afterwards."""
    subset = _attack_subset(records, attack)
    survived = sum(1 for r in subset if r.originally_correct and not r.attack_succeeded)
    return 100.0 * survived / len(subset)


def attack_success_rate(records, attack: str) -> float:
    """Percent of originally-correct examples this attack flipped."""
    subset = _attack_subset(records, attack)
    attacked = [r for r in subset if r.originally_correct]
    if not attacked:
        raise NoAttackedExamples(f"attack {attack!r} has no originally-correct records")
    return 100.0 * sum(r.attack_succeeded for r in attacked) / len(attacked)


def average_queries(records, attack: str, successful_only: bool = False) -> float:
    """Mean queries spent per attacked (originally-correct) example.

    ``successful_only`` restricts the mean to episodes that flipped the
    label, for benchmarks that report it that way.
    """
    subset = _attack_subset(records, attack)
    attacked = [r for r in subset if r.originally_correct]
    if successful_only:
        attacked = [r for r in attacked if r.attack_succeeded]
    if not attacked:
        raise NoAttackedExamples(f"attack {attack!r} has no qualifying records")
    return sum(r.queries_used for r in attacked) / len(attacked)


def performance_drop_rate(acc: float, aua: float) -> float:
    """Relative accuracy decline, 100 * (acc - aua) / acc."""
    if acc <= 0.0:
        raise ZeroAccuracy("performance_drop_rate undefined at acc <= 0")
    if aua < 0.0 or aua > acc + 1e-9:
        raise ValidationError(f"aua={aua} outside [0, acc={acc}]")
    return 100.0 * (acc - aua) / acc


def average_pdr(pdrs) -> float:
    """Arithmetic mean of per-attack drop rates."""
    pdrs = list(pdrs)
    if not pdrs:
        raise EmptyList("average_pdr of an empty list")
    return sum(pdrs) / len(pdrs)


@dataclass(frozen=True)
class AttackMetrics:
    aua: float
    asr: float
    avgq: float
    pdr: float


@dataclass(frozen=True)
class MetricsReport:
    """Clean accuracy plus per-attack metrics and their averaged drop rate."""

    acc: float
    per_attack: dict[str, AttackMetrics]
    apdr: float

    def to_json_dict(self, decimals: int = 2) -> dict:
        # Two decimals in reports, full precision internally.
        return {
            "acc": round(self.acc, decimals),
            "attacks": {
                name: {
                    "aua": round(m.aua, decimals),
                    "asr": round(m.asr, decimals),
                    "avgq": round(m.avgq, decimals),
                    "pdr": round(m.pdr, decimals),
                }
                for name, m in self.per_attack.items()
            },
            "apdr": round(self.apdr, decimals),
        }


def compute_report(records) -> MetricsReport:
    """Aggregate a full record set into a :class:`MetricsReport`.

    Validates that ids are unique within each attack and that
    ``originally_correct`` is consistent for an example across attacks.
    Clean accuracy is computed over distinct examples; attacks are reported
    in sorted name order.
    """
    records = list(records)
    if not records:
        raise EmptyRecords("compute_report of an empty record set")
    correct_by_id: dict[str, bool] = {}
    seen: set[tuple[str, str]] = set()
    for r in records:
        key = (r.attack_name, r.example_id)
        if key in seen:
            raise DuplicateId(f"example {r.example_id!r} repeated for attack {r.attack_name!r}")
        seen.add(key)
        prev = correct_by_id.get(r.example_id)
        if prev is not None and prev != r.originally_correct:
            raise ValidationError(
                f"example {r.example_id!r}: originally_correct differs between attacks"
            )
        correct_by_id[r.example_id] = r.originally_correct

    acc = 100.0 * sum(correct_by_id.values()) / len(correct_by_id)
    per_attack: dict[str, AttackMetrics] = {}
    for attack in sorted({r.attack_name for r in records}):
        aua = accuracy_under_attack(records, attack)
        per_attack[attack] = AttackMetrics(
            aua=aua,
            asr=attack_success_rate(records, attack),
            avgq=average_queries(records, attack),
            pdr=performance_drop_rate(acc, aua),
        )
    return MetricsReport(
        acc=acc,
        per_attack=per_attack,
        apdr=average_pdr([m.pdr for m in per_attack.values()]),
    )


def load_records_jsonl(path) -> list[AttackRecord]:
    """Read one JSON object per line into :class:`AttackRecord` values.

    Required fields: example_id (str), originally_correct (bool),
    queries_used (int >= 0), attack_name (str); attack_succeeded (bool) is
    required exactly when originally_correct is true. Blank lines are
    ignored.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ValidationError(f"{path}:{lineno}: expected a JSON object")
        try:
            record = AttackRecord(
                example_id=str(obj["example_id"]),
                originally_correct=bool(obj["originally_correct"]),
                attack_succeeded=(
                    None if obj.get("attack_succeeded") is None else bool(obj["attack_succeeded"])
                ),
                queries_used=int(obj["queries_used"]),
                attack_name=str(obj["attack_name"]),
            )
        except KeyError as exc:
            raise ValidationError(f"{path}:{lineno}: missing field {exc}") from exc
        out.append(record)
    return out
