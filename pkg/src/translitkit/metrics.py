"""Error-rate evaluation: CER, WER and the two full-sentence protocols.

Error rates count substitutions, deletions and insertions in a minimum-edit
alignment of hypothesis against reference, divided by the number of
reference tokens and reported as percentages.  Corpus rates pool the counts
of all sentences.

*Whitespace* evaluation turns every reference character outside the
lexicon-covered set ``B_hat`` into a space before tokenizing.
*Pass-through* evaluation compares whitespace tokens of the reassembled
system output with the untouched references.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Hashable, Sequence

import numpy as np

from . import _kernels
from .scriptdata import ScriptProfile, normalize

__all__ = [
    "EditStats",
    "EvalReport",
    "cer",
    "edit_align",
    "passthrough_eval",
    "round_half_up",
    "wer",
    "whitespace_eval",
    "whitespace_map",
]

TIE_BREAK = "substitution > deletion > insertion"


@dataclass(frozen=True)
class EditStats:
    substitutions: int
    deletions: int
    insertions: int
    ref_tokens: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def denominator(self) -> int:
        # empty references count as one token so rates stay finite
        return max(self.ref_tokens, 1)

    @property
    def rate(self) -> float:
        return 100.0 * self.errors / self.denominator


def _to_ids(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> tuple[np.ndarray, np.ndarray]:
    ids: dict = {}
    r = np.array([ids.setdefault(t, len(ids)) for t in ref], dtype=np.int64)
    h = np.array([ids.setdefault(t, len(ids)) for t in hyp], dtype=np.int64)
    return r, h


def edit_align(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> EditStats:
    """Unit-cost Levenshtein alignment of two token sequences.

    Among minimal alignments the backtrace prefers a substitution (or match),
    then a deletion, then an insertion.
    """
    r, h = _to_ids(ref, hyp)
    s, d, i = _kernels.edit_ops(r, h)
    return EditStats(int(s), int(d), int(i), len(ref))


def round_half_up(x: float, digits: int = 1) -> float:
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


@dataclass
class EvalReport:
    protocol: str
    unit: str
    sentences: list[EditStats] = field(default_factory=list)
    empty_references: list[int] = field(default_factory=list)
    bpc: float | None = None
    bpnc: float | None = None

    @property
    def errors(self) -> int:
        return sum(s.errors for s in self.sentences)

    @property
    def ref_tokens(self) -> int:
        return sum(s.denominator for s in self.sentences)

    @property
    def error_rate(self) -> float:
        return 100.0 * self.errors / max(self.ref_tokens, 1)

    @property
    def wer(self) -> float | None:
        return self.error_rate if self.unit == "word" else None

    @property
    def cer(self) -> float | None:
        return self.error_rate if self.unit == "char" else None

    def rounded(self) -> float:
        return round_half_up(self.error_rate, 1)

    def to_dict(self) -> dict:
        key = "wer" if self.unit == "word" else "cer"
        totals = {
            "substitutions": sum(s.substitutions for s in self.sentences),
            "deletions": sum(s.deletions for s in self.sentences),
            "insertions": sum(s.insertions for s in self.sentences),
            "ref_tokens": self.ref_tokens,
        }
        out = {
            "protocol": self.protocol,
            "unit": self.unit,
            key: self.rounded(),
            f"{key}_exact": self.error_rate,
            "totals": totals,
            "sentences": [asdict(s) for s in self.sentences],
            "empty_references": self.empty_references,
            "config": {"tie_break": TIE_BREAK, "rounding": "one decimal, half-up", "empty_ref_floor": 1},
        }
        if self.bpc is not None:
            out["bpc"] = self.bpc
            out["bpnc"] = self.bpnc
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, **kw)


def _evaluate(protocol: str, unit: str, ref_toks, hyp_toks) -> EvalReport:
    if len(ref_toks) != len(hyp_toks):
        raise ValueError(f"{len(ref_toks)} references but {len(hyp_toks)} hypotheses")
    report = EvalReport(protocol, unit)
    for k, (r, h) in enumerate(zip(ref_toks, hyp_toks)):
        if not r:
            report.empty_references.append(k)
        report.sentences.append(edit_align(r, h))
    return report


def cer(refs: Sequence[str], hyps: Sequence[str]) -> float:
    """Corpus character error rate (percent) over NFC code points."""
    return char_eval(refs, hyps).error_rate


def char_eval(refs: Sequence[str], hyps: Sequence[str]) -> EvalReport:
    return _evaluate("cer", "char", [list(normalize(r)) for r in refs], [list(normalize(h)) for h in hyps])


def wer(refs: Sequence[str], hyps: Sequence[str], case_sensitive: bool = True) -> EvalReport:
    def toks(s):
        s = normalize(s)
        return (s if case_sensitive else s.lower()).split()

    return _evaluate("wer", "word", [toks(r) for r in refs], [toks(h) for h in hyps])


_SPACES = re.compile(r"\s+")


def whitespace_map(text: str, profile: ScriptProfile) -> str:
    """Replace characters outside ``B_hat`` by spaces and collapse runs."""
    mapped = "".join(ch if profile.in_Bhat(ch) else " " for ch in normalize(text))
    return _SPACES.sub(" ", mapped).strip()


def whitespace_eval(refs: Sequence[str], hyps: Sequence[str], profile: ScriptProfile) -> EvalReport:
    if not profile.lexicon_block:
        raise ValueError("whitespace evaluation needs a profile with a lexicon-covered set (use with_lexicon)")
    ref_toks = [whitespace_map(r, profile).split() for r in refs]
    hyp_toks = [normalize(h).split() for h in hyps]
    return _evaluate("whitespace", "word", ref_toks, hyp_toks)


def passthrough_eval(refs: Sequence[str], hyps: Sequence[str], case_sensitive: bool = True) -> EvalReport:
    report = wer(refs, hyps, case_sensitive=case_sensitive)
    report.protocol = "passthrough"
    return report
