"""Candidate generation: sampling schedules, backends, deduplication.

The pipeline overgenerates: for each input it requests one candidate
per schedule step (a greedy decode followed by top-k samples with
growing k), then deduplicates. Real decoder backends plug in through
the generator contract; a deterministic rule-based mock ships for
tests and offline runs, plus a line-protocol adapter that talks to an
external generator process over stdin/stdout.
"""

from __future__ import annotations

import json
import logging
import subprocess
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Protocol

log = logging.getLogger(__name__)


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenerationConfig:
    length_penalty: float = 1.0
    temperature: float = 0.7
    no_repeat_ngram: int = 3
    min_length: int = 7
    max_length: int = 256
    n_candidates: int = 10

    def __post_init__(self):
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        if not 0 < self.min_length <= self.max_length:
            raise ValueError("need 0 < min_length <= max_length")

    def to_payload(self) -> dict:
        return {
            "length_penalty": self.length_penalty,
            "temperature": self.temperature,
            "no_repeat_ngram": self.no_repeat_ngram,
            "min_length": self.min_length,
            "max_length": self.max_length,
            "n_candidates": self.n_candidates,
        }


@dataclass(frozen=True)
class Directive:
    """One decoding instruction: greedy, or top-k sampling with a given k."""

    kind: str  # "greedy" | "topk"
    k: int | None = None

    def __post_init__(self):
        if self.kind not in ("greedy", "topk"):
            raise ValueError(f"unknown directive kind {self.kind!r}")
        if self.kind == "topk" and (self.k is None or self.k < 1):
            raise ValueError("topk directive needs k >= 1")
        if self.kind == "greedy" and self.k is not None:
            raise ValueError("greedy directive takes no k")

    def __str__(self) -> str:
        return "greedy" if self.kind == "greedy" else f"topk:{self.k}"

    @classmethod
    def parse(cls, text: str) -> "Directive":
        if text == "greedy":
            return GREEDY
        if text.startswith("topk:"):
            return cls("topk", int(text.split(":", 1)[1]))
        raise ValueError(f"cannot parse directive {text!r}")


GREEDY = Directive("greedy")


def TOPK(k: int) -> Directive:
    return Directive("topk", k)


def make_schedule(n: int) -> list[Directive]:
    """The length-n sampling schedule: greedy, then top-k with k = 5, 10, ...

    >>> [str(d) for d in make_schedule(3)]
    ['greedy', 'topk:5', 'topk:10']
    """
    if n < 1:
        raise ValueError(f"schedule length must be >= 1, got {n}")
    return [GREEDY] + [TOPK(5 * i) for i in range(1, n)]


@dataclass(frozen=True)
class Candidate:
    text: str
    origin: Directive | None  # None only for the synthetic unedited candidate
    index: int


@dataclass(frozen=True)
class CandidateSet:
    source: str  # the serialized input the generator saw
    candidates: tuple[Candidate, ...]


@dataclass(frozen=True)
class GeneratorCapabilities:
    supports_context: bool = False
    supports_seeding: bool = True


class Generator(Protocol):
    capabilities: GeneratorCapabilities

    def generate(
        self, input_text: str, directive: Directive, config: GenerationConfig, seed: int
    ) -> str: ...


def generate_candidates(
    generator: Generator,
    input_text: str,
    config: GenerationConfig,
    schedule: Sequence[Directive] | None = None,
    seed: int = 0,
) -> CandidateSet:
    """Run every schedule step through the generator.

    A failing step is skipped and logged rather than aborting the set;
    only an entirely empty result is an error. Candidate indices follow
    schedule order, counting skipped steps, so index i always means
    schedule step i.
    """
    if schedule is None:
        schedule = make_schedule(config.n_candidates)
    if not schedule:
        raise GenerationError("empty schedule")
    candidates = []
    for i, directive in enumerate(schedule):
        try:
            text = generator.generate(input_text, directive, config, seed)
        except Exception as exc:
            log.warning("generation step %d (%s) failed: %s", i, directive, exc)
            continue
        candidates.append(Candidate(text=text, origin=directive, index=i))
    if not candidates:
        raise GenerationError(f"all {len(schedule)} generation steps failed")
    return CandidateSet(source=input_text, candidates=tuple(candidates))


def dedup(candidate_set: CandidateSet) -> CandidateSet:
    """Drop byte-identical duplicate texts, keeping each first occurrence."""
    seen: set[str] = set()
    kept = []
    for cand in candidate_set.candidates:
        if cand.text in seen:
            continue
        seen.add(cand.text)
        kept.append(cand)
    return CandidateSet(source=candidate_set.source, candidates=tuple(kept))


# ---------------------------------------------------------------------------
# mock generator

# Apostrophe-dropped forms the greedy cleanup restores.
_CONTRACTION_FIXES = {
    "its": "it's",
    "dont": "don't",
    "cant": "can't",
    "wont": "won't",
    "isnt": "isn't",
    "doesnt": "doesn't",
    "im": "i'm",
    "ive": "i've",
    "thats": "that's",
    "theyre": "they're",
}

_SYNONYMS = {
    "good": "beneficial",
    "bad": "harmful",
    "big": "large",
    "small": "minor",
    "many": "numerous",
    "people": "individuals",
    "important": "crucial",
    "wrong": "mistaken",
    "shows": "demonstrates",
    "helps": "supports",
}

_HEDGES = ("maybe", "perhaps", "possibly", "probably", "somewhat", "arguably", "likely")

_ELABORATIONS = (
    "This point is central to the wider debate.",
    "Evidence from the discussion supports this view.",
    "The consequences of this are hard to dismiss.",
    "Opposing positions have not refuted this.",
    "This holds in the present context as well.",
    "The underlying trend makes this more pressing.",
    "Recent discussion has only strengthened the case.",
    "Few participants dispute the premise behind this.",
)


def _greedy_cleanup(text: str) -> str:
    # Cascade of copy-editing rules, highest priority first; every
    # applicable rule fires: capitalization, apostrophe restoration,
    # terminal punctuation.
    tokens = text.split()
    if not tokens:
        return text
    fixed = []
    for tok in tokens:
        repl = _CONTRACTION_FIXES.get(tok.lower())
        if repl is not None:
            repl = repl.capitalize() if tok[0].isupper() else repl
            fixed.append(repl)
        else:
            fixed.append(tok)
    tokens = fixed
    first = tokens[0]
    if first and first[0].isalpha() and first[0].islower():
        tokens[0] = first[0].upper() + first[1:]
    out = " ".join(tokens)
    if out and out[-1] not in ".!?":
        out += "."
    return out


class MockGenerator:
    """Deterministic rule-table generator for offline runs and tests.

    GREEDY applies the copy-editing cascade above; the same rules run
    under ``_greedy_cleanup``, so an already-clean input comes back
    unchanged. TOPK(k) picks a rewrite rule from a fixed table indexed
    by ``(seed + k // 5)``: append a templated elaboration, substitute
    a synonym, or drop a hedge word, falling forward through the table
    when a rule does not apply. Output is truncated to
    ``config.max_length`` whitespace tokens. Pure function of
    (input, directive, config, seed).
    """

    capabilities = GeneratorCapabilities(supports_context=True, supports_seeding=True)

    def __init__(self, delimiters: tuple[str, str] = ("<PREV>", "<TOPIC>")):
        self._delimiters = delimiters

    def _strip_context(self, input_text: str) -> str:
        text = input_text
        for delim in self._delimiters:
            pos = text.find(delim)
            if pos != -1:
                text = text[:pos]
        return text.strip()

    def _substitute_synonym(self, text: str) -> str | None:
        tokens = text.split()
        for i, tok in enumerate(tokens):
            stripped = tok.strip(".,!?;:")
            repl = _SYNONYMS.get(stripped.lower()) if stripped else None
            if repl is None:
                continue
            if stripped[0].isupper():
                repl = repl.capitalize()
            start = tok.find(stripped)
            tokens[i] = tok[:start] + repl + tok[start + len(stripped) :]
            return " ".join(tokens)
        return None

    def _drop_hedge(self, text: str) -> str | None:
        tokens = text.split()
        for i, tok in enumerate(tokens):
            if tok.strip(".,!?;:").lower() in _HEDGES:
                rest = tokens[:i] + tokens[i + 1 :]
                if not rest:
                    return None
                if i == 0 and rest[0][0].isalpha():
                    rest[0] = rest[0][0].upper() + rest[0][1:]
                return " ".join(rest)
        return None

    def _elaborate(self, text: str, slot: int) -> str:
        sentence = _ELABORATIONS[slot % len(_ELABORATIONS)]
        base = text if text and text[-1] in ".!?" else text + "."
        return f"{base} {sentence}"

    def generate(
        self,
        input_text: str,
        directive: Directive,
        config: GenerationConfig = GenerationConfig(),
        seed: int = 0,
    ) -> str:
        source = self._strip_context(input_text)
        if not source:
            raise GenerationError("empty input after context stripping")
        if directive.kind == "greedy":
            out = _greedy_cleanup(source)
        else:
            slot = seed + directive.k // 5
            for attempt in range(3):
                rule = (slot + attempt) % 3
                if rule == 0:
                    out = self._elaborate(source, slot)
                    break
                if rule == 1:
                    maybe = self._substitute_synonym(source)
                    if maybe is not None:
                        out = maybe
                        break
                else:
                    maybe = self._drop_hedge(source)
                    if maybe is not None:
                        out = maybe
                        break
            else:
                out = self._elaborate(source, slot)
        tokens = out.split()
        if len(tokens) > config.max_length:
            out = " ".join(tokens[: config.max_length])
        return out


def mock_generate(
    input_text: str,
    directive: Directive,
    seed: int = 0,
    config: GenerationConfig = GenerationConfig(),
) -> str:
    """Convenience wrapper around a default-configured MockGenerator."""
    return MockGenerator().generate(input_text, directive, config, seed)


# ---------------------------------------------------------------------------
# external generator adapter

class StdioGenerator:
    """Drive an external generator process over a JSON-lines protocol.

    One request per line on stdin:
    ``{"input": str, "directive": "greedy"|"topk:K", "config": {...},
    "seed": int}``; one response per line on stdout, either
    ``{"text": str}`` or ``{"error": str}``. The child is spawned once
    and reused; protocol violations and reported errors surface as
    GenerationError.
    """

    capabilities = GeneratorCapabilities(supports_context=True, supports_seeding=True)

    def __init__(self, command: Sequence[str]):
        self._command = list(command)
        self._proc: subprocess.Popen | None = None

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        return self._proc

    def generate(
        self,
        input_text: str,
        directive: Directive,
        config: GenerationConfig = GenerationConfig(),
        seed: int = 0,
    ) -> str:
        proc = self._ensure_proc()
        request = {
            "input": input_text,
            "directive": str(directive),
            "config": config.to_payload(),
            "seed": seed,
        }
        assert proc.stdin is not None and proc.stdout is not None
        proc.stdin.write(json.dumps(request, ensure_ascii=False) + "\n")
        proc.stdin.flush()
        line = proc.stdout.readline()
        if not line:
            raise GenerationError("generator process closed its stdout")
        try:
            response = json.loads(line)
        except json.JSONDecodeError:
            raise GenerationError(f"generator sent malformed JSON: {line!r}") from None
        if "error" in response:
            raise GenerationError(f"generator error: {response['error']}")
        if "text" not in response or not isinstance(response["text"], str):
            raise GenerationError(f"generator response missing 'text': {response!r}")
        return response["text"]

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            assert self._proc.stdin is not None
            self._proc.stdin.close()
            self._proc.wait(timeout=5)
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


# ---------------------------------------------------------------------------
# candidate persistence

def candidate_set_to_record(pair_id: str, cset: CandidateSet) -> dict:
    return {
        "pair_id": pair_id,
        "source": cset.source,
        "candidates": [
            {"text": c.text, "origin": str(c.origin) if c.origin else None, "index": c.index}
            for c in cset.candidates
        ],
    }


def candidate_set_from_record(record: dict) -> tuple[str, CandidateSet]:
    candidates = tuple(
        Candidate(
            text=c["text"],
            origin=Directive.parse(c["origin"]) if c.get("origin") else None,
            index=int(c["index"]),
        )
        for c in record["candidates"]
    )
    return record["pair_id"], CandidateSet(source=record["source"], candidates=candidates)
