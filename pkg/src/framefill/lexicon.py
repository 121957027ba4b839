"""Frame inventory: frames with their evocative lexical units, rule-based
morphological variant expansion, and word-embedding lookup for LUs.

All matching downstream happens on lowercased text; lexicon types are
immutable after load and safe to share across concurrent decoders.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

VOWELS = "aeiou"
SIBILANT_ENDINGS = ("s", "x", "z", "ch", "sh", "o")


class LexiconError(ValueError):
    pass


class Pos(str, Enum):
    VERB = "v"
    NOUN = "n"
    ADJ = "a"
    ADV = "adv"
    PREP = "prep"
    OTHER = "other"

    @classmethod
    def parse(cls, value: str) -> "Pos":
        try:
            return cls(value)
        except ValueError:
            return cls.OTHER


def _normalize_surface(s: str) -> str:
    return " ".join(s.split())


@dataclass(frozen=True)
class LexicalUnit:
    lemma: str
    pos: Pos
    variants: frozenset[str]

    def __post_init__(self):
        if not self.lemma:
            raise LexiconError("LU lemma must be non-empty")
        if not self.variants or self.lemma not in self.variants:
            raise LexiconError(f"variants of {self.lemma!r} must include the lemma")
        for v in self.variants:
            if not v or v != _normalize_surface(v):
                raise LexiconError(f"bad variant {v!r} for LU {self.lemma!r}")

    @classmethod
    def create(cls, lemma: str, pos: str | Pos, variants: Iterable[str] = ()) -> "LexicalUnit":
        lemma = _normalize_surface(lemma).lower()
        vs = {lemma}
        vs.update(_normalize_surface(v).lower() for v in variants if v.strip())
        return cls(lemma, Pos.parse(pos) if isinstance(pos, str) else pos, frozenset(vs))


def frame_token(name: str) -> str:
    return "[" + name.replace(" ", "_") + "]"


@dataclass(frozen=True)
class Frame:
    name: str
    lexical_units: tuple[LexicalUnit, ...]

    def __post_init__(self):
        if not self.lexical_units:
            raise LexiconError(f"frame {self.name!r} has no lexical units")
        seen = set()
        for lu in self.lexical_units:
            key = (lu.lemma, lu.pos)
            if key in seen:
                raise LexiconError(f"frame {self.name!r}: duplicate LU {key}")
            seen.add(key)

    @property
    def id(self) -> str:
        return frame_token(self.name)

    def variant_map(self) -> dict[str, LexicalUnit]:
        """Variant surface -> owning LU; collisions keep the first and log."""
        out: dict[str, LexicalUnit] = {}
        for lu in self.lexical_units:
            for v in sorted(lu.variants):
                if v in out:
                    log.warning(
                        "frame %s: variant %r of %s already claimed by %s",
                        self.name, v, lu.lemma, out[v].lemma,
                    )
                else:
                    out[v] = lu
        return out


def _ends_cvc(word: str) -> bool:
    # single trailing consonant after a single vowel, stress unknowable so
    # only double for words with exactly one vowel group
    if len(word) < 3:
        return False
    a, b, c = word[-3], word[-2], word[-1]
    if c in VOWELS or c in "wxy" or b not in VOWELS or a in VOWELS:
        return False
    groups = 0
    prev_vowel = False
    for ch in word:
        is_vowel = ch in VOWELS
        if is_vowel and not prev_vowel:
            groups += 1
        prev_vowel = is_vowel
    return groups == 1


def _inflect_verb(word: str) -> set[str]:
    forms = {word}
    if word.endswith(SIBILANT_ENDINGS):
        forms.add(word + "es")
    elif word.endswith("y") and len(word) > 1 and word[-2] not in VOWELS:
        forms.add(word[:-1] + "ies")
    else:
        forms.add(word + "s")
    if word.endswith("e"):
        forms.add(word + "d")
    elif word.endswith("y") and len(word) > 1 and word[-2] not in VOWELS:
        forms.add(word[:-1] + "ied")
    elif _ends_cvc(word):
        forms.add(word + word[-1] + "ed")
    else:
        forms.add(word + "ed")
    if word.endswith("ie"):
        forms.add(word[:-2] + "ying")
    elif word.endswith("e") and not word.endswith("ee"):
        forms.add(word[:-1] + "ing")
    elif _ends_cvc(word):
        forms.add(word + word[-1] + "ing")
    else:
        forms.add(word + "ing")
    return forms


def _inflect_noun(word: str) -> set[str]:
    forms = {word}
    if word.endswith("y") and len(word) > 1 and word[-2] not in VOWELS:
        forms.add(word[:-1] + "ies")
    elif word.endswith(SIBILANT_ENDINGS):
        forms.add(word + "es")
    else:
        forms.add(word + "s")
    return forms


def expand_variants(lu: LexicalUnit) -> LexicalUnit:
    """Augment variants with rule-based English inflections of the lemma.

    Verbs inflect on the first word of a multi-word lemma, nouns on the last;
    other parts of speech keep the lemma (plus any file-supplied variants,
    which are always preserved verbatim). Idempotent.
    """
    words = lu.lemma.split(" ")
    expanded: set[str] = set(lu.variants)
    if lu.pos is Pos.VERB:
        head, rest = words[0], words[1:]
        for form in _inflect_verb(head):
            expanded.add(" ".join([form] + rest))
    elif lu.pos is Pos.NOUN:
        front, tail = words[:-1], words[-1]
        for form in _inflect_noun(tail):
            expanded.add(" ".join(front + [form]))
    return LexicalUnit(lu.lemma, lu.pos, frozenset(expanded))


def load_lexicon(path: str | Path, expand: bool = True) -> list[Frame]:
    """Read the lexicon JSON file; frame order is file order."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise LexiconError(f"{path.name}: parse error at line {e.lineno}: {e.msg}") from e
    if not isinstance(data, dict) or "frames" not in data:
        raise LexiconError(f"{path.name}: missing top-level 'frames' field")
    frames: list[Frame] = []
    names: set[str] = set()
    for fi, fobj in enumerate(data["frames"]):
        where = f"frames[{fi}]"
        if not isinstance(fobj, dict) or "name" not in fobj:
            raise LexiconError(f"{path.name}: {where}: missing 'name' field")
        name = fobj["name"]
        if name in names:
            raise LexiconError(f"{path.name}: duplicate frame {name!r}")
        names.add(name)
        lus: list[LexicalUnit] = []
        for li, lobj in enumerate(fobj.get("lexical_units", [])):
            lwhere = f"{where}.lexical_units[{li}]"
            if not isinstance(lobj, dict) or "lemma" not in lobj:
                raise LexiconError(f"{path.name}: {lwhere}: missing 'lemma' field")
            lu = LexicalUnit.create(
                lobj["lemma"], lobj.get("pos", "other"), lobj.get("variants", ())
            )
            if expand:
                lu = expand_variants(lu)
            lus.append(lu)
        frames.append(Frame(name, tuple(lus)))
    return frames


def save_lexicon(frames: Sequence[Frame], path: str | Path) -> None:
    data = {
        "frames": [
            {
                "name": fr.name,
                "lexical_units": [
                    {"lemma": lu.lemma, "pos": lu.pos.value, "variants": sorted(lu.variants)}
                    for lu in fr.lexical_units
                ],
            }
            for fr in frames
        ]
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write("\n")


class FrameIndex:
    """Frame lookup by id token or name (case preserved from the file)."""

    def __init__(self, frames: Sequence[Frame]):
        self.frames = list(frames)
        self._by_id = {fr.id: fr for fr in frames}
        self._by_name = {fr.name: fr for fr in frames}

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __contains__(self, key: str) -> bool:
        return key in self._by_id or key in self._by_name

    def get(self, key: str) -> Frame | None:
        return self._by_id.get(key) or self._by_name.get(key)

    def resolve(self, key: str) -> Frame:
        fr = self.get(key)
        if fr is None:
            raise LexiconError(f"unknown frame {key!r}")
        return fr

    def ids(self) -> list[str]:
        return [fr.id for fr in self.frames]


@dataclass(frozen=True)
class EmbeddingTable:
    dimension: int
    entries: Mapping[str, np.ndarray]
    missing: frozenset[str]

    def __post_init__(self):
        for word, vec in self.entries.items():
            if vec.shape != (self.dimension,):
                raise LexiconError(f"embedding for {word!r} has wrong dimension")

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.entries

    def get(self, word: str) -> np.ndarray | None:
        return self.entries.get(word.lower())


def load_embeddings(path: str | Path, vocabulary: Iterable[str]) -> EmbeddingTable:
    """Load vectors for the requested words from a whitespace-separated text
    embedding file. Multi-word entries average their word vectors; entries
    with no covered word are recorded as missing."""
    wanted = {w.lower() for w in vocabulary}
    needed_words: set[str] = set()
    for w in wanted:
        needed_words.update(w.split(" "))
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                continue
            word = parts[0].lower()
            if dimension is None:
                dimension = len(parts) - 1
            elif len(parts) - 1 != dimension:
                raise LexiconError(
                    f"embedding line {lineno}: expected {dimension} values, got {len(parts) - 1}"
                )
            if word in needed_words and word not in vectors:
                vectors[word] = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
    entries: dict[str, np.ndarray] = {}
    missing: set[str] = set()
    for w in sorted(wanted):
        covered = [vectors[part] for part in w.split(" ") if part in vectors]
        if covered:
            entries[w] = np.mean(covered, axis=0)
        else:
            missing.add(w)
    if missing:
        log.info("embeddings: %d unembeddable entries", len(missing))
    return EmbeddingTable(dimension or 0, entries, frozenset(missing))
