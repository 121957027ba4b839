#!/usr/bin/env python3
"""Regenerate the bundled assets: the templated story corpus with lexical
frame annotations, the small BPE vocabulary trained on it, and synthetic LU
embeddings. Deterministic; run from the repo root:

    python scripts/build_assets.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from random import Random

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from framefill.bpe import CORE_SPECIALS, build_vocabulary, save_vocabulary, train_bpe
from framefill.evaluation import first_trigger_offset
from framefill.lexicon import load_lexicon

ASSETS = Path(__file__).resolve().parents[1] / "src" / "framefill" / "assets"

NAMES = ["Alice", "Bob", "Charles", "Emma", "Mary", "Tom", "Sara", "Ben", "Lucy", "Alec"]
KIN = ["mother", "father", "sister", "brother", "daughter", "son", "grandmother"]
FOODS = ["fruit", "bread", "soup", "pickles", "vegetables", "cake"]
PLACES = ["store", "bakery", "library", "museum", "school"]

TEMPLATES = [
    [
        "{name} went to the {place} one morning.",
        "{he} wanted some fresh {food}.",
        "{name} bought {food} and a little bread.",
        "The buyer paid quickly and left the {place}.",
        "{he} felt happy about the good meal.",
    ],
    [
        "{name} decided to bake a cake.",
        "{he} put the flour in a big bowl.",
        "{name} baked the cake in the oven all afternoon.",
        "The whole house smelled wonderful.",
        "Everyone was delighted at the party.",
    ],
    [
        "{name} spends money on pickles every day.",
        "{he} decides to make his own pickles.",
        "{name} puts the pickles in a heavy jar.",
        "{he} waits two weeks for the pickles.",
        "{name} opens the jar and eats the perfect pickles.",
    ],
    [
        "{name} and {name2} wanted to write a book.",
        "They decided to team up.",
        "They worked together every evening.",
        "{name} wrote the first draft in a month.",
        "They were proud of their collaboration.",
    ],
    [
        "{name} went to a restaurant with {his} {kin}.",
        "They ordered soup and warm bread.",
        "{name} ate the soup quickly.",
        "{his} {kin} sipped a drink slowly.",
        "They left the place happy.",
    ],
    [
        "{name} travelled to the city by train.",
        "{he} went to see the old museum.",
        "{name} saw many paintings there.",
        "That afternoon {he} called {his} {kin}.",
        "It was the best day of the whole year.",
    ],
    [
        "{name} slipped on the wet stairs.",
        "{he} hurt an arm very badly.",
        "{his} {kin} called the doctor at once.",
        "The doctor asked {him} to rest for a week.",
        "{name} realized {he} should be careful.",
    ],
    [
        "{name} loved writing little stories.",
        "{he} decided to enter a contest.",
        "{name} wrote a story about {his} {kin}.",
        "{he} asked {his} {kin} to read it.",
        "{name} won the prize and was very happy.",
    ],
    [
        "{name} planned a party for {his} birthday.",
        "{he} asked {name2} to help with the food.",
        "They baked bread and a big cake together.",
        "The guests ate and drank all evening.",
        "Everyone left the house delighted.",
    ],
    [
        "{name} lived in a small house.",
        "One morning {he} decided to leave the town.",
        "{he} put everything in a big box.",
        "{his} {kin} drove {him} to the station.",
        "{name} departed on the early train.",
    ],
    [
        "{name} wanted to contact an old friend.",
        "{he} looked for the address all day.",
        "{name} wrote a long letter that evening.",
        "{he} asked the friend to visit soon.",
        "The friend phoned {him} the next day.",
    ],
    [
        "{name} grew vegetables behind the house.",
        "{he} filled a basket with fresh vegetables.",
        "{name} boiled a big pot of soup.",
        "{his} {kin} ate two bowls of it.",
        "They felt happy and full.",
    ],
    [
        "{name} went to school every morning.",
        "One day {he} noticed a new library.",
        "{he} asked the teacher about it.",
        "The teacher said it opened last week.",
        "{name} concluded it was worth a visit.",
    ],
    [
        "{name} and {name2} were in cahoots.",
        "They conspired to surprise their {kin}.",
        "They cooked a huge dinner together.",
        "Their {kin} was delighted by the surprise.",
        "The family feasted late into the evening.",
    ],
    [
        "{name} woke up late one morning.",
        "{he} wanted a very big breakfast.",
        "{name} fried eggs and boiled water for tea.",
        "{he} drank juice and ate warm bread.",
        "Then {he} left for work in a hurry.",
    ],
    [
        "{name} worked at the bakery near the tower.",
        "Every day {he} baked bread before sunrise.",
        "One morning a buyer purchased every loaf.",
        "{name} phoned {his} {kin} to share the news.",
        "They celebrated with a small feast.",
    ],
]

PRONOUNS = [("He", "his", "him"), ("She", "her", "her")]


def build_stories() -> list[dict]:
    rng = Random(20240601)
    stories = []
    sid = 0
    for round_idx in range(8):
        for t_idx, template in enumerate(TEMPLATES):
            name = NAMES[(sid + round_idx) % len(NAMES)]
            name2 = NAMES[(sid + round_idx + 3) % len(NAMES)]
            he, his, him = PRONOUNS[sid % 2]
            kin = KIN[sid % len(KIN)]
            food = FOODS[sid % len(FOODS)]
            place = PLACES[sid % len(PLACES)]
            sentences = []
            for line in template:
                s = line.format(
                    name=name, name2=name2, kin=kin, food=food, place=place,
                    he=he if line.startswith("{he}") else he.lower(),
                    his=his, him=him,
                )
                # sentence-start pronouns keep their capital
                s = s[0].upper() + s[1:]
                sentences.append(s)
            stories.append({
                "title": f"Story {sid:03d} ({name})",
                "sentences": sentences,
            })
            sid += 1
    rng.shuffle(stories)
    return stories


def annotate(stories: list[dict], frames) -> None:
    for story in stories:
        frame_lists = []
        span_lists = []
        for sentence in story["sentences"]:
            hits = []
            for fr in frames:
                off = first_trigger_offset(sentence, fr)
                if off is not None:
                    hits.append((off, fr.id))
            hits.sort()
            frame_lists.append([fid for _, fid in hits])
            span_lists.append([[fid, off] for off, fid in hits])
        story["frames"] = frame_lists
        story["spans"] = span_lists


def build_embeddings(frames, dim: int = 16) -> list[str]:
    rng = np.random.default_rng(7)
    lines = []
    seen = set()
    for fr in frames:
        base = rng.normal(0.0, 1.0, size=dim)
        base = 3.0 * base / np.linalg.norm(base)
        for lu in fr.lexical_units:
            for word in lu.lemma.split(" "):
                if word in seen:
                    continue
                seen.add(word)
                vec = base + rng.normal(0.0, 0.6, size=dim)
                lines.append(word + " " + " ".join(f"{x:.4f}" for x in vec))
    return lines


def main() -> None:
    frames = load_lexicon(ASSETS / "lexicon.json")
    stories = build_stories()
    annotate(stories, frames)
    with open(ASSETS / "stories.jsonl", "w", encoding="utf-8") as f:
        for story in stories:
            f.write(json.dumps(story, ensure_ascii=False) + "\n")
    print(f"wrote {len(stories)} stories")

    texts = [s for story in stories for s in story["sentences"]]
    token_to_id, merges = train_bpe(texts, num_merges=512)
    specials = list(CORE_SPECIALS) + [fr.id for fr in frames]
    vocab = build_vocabulary(token_to_id, merges, specials)
    save_vocabulary(vocab, ASSETS)
    print(f"vocab: {len(token_to_id)} bpe tokens + {len(specials)} specials")

    lines = build_embeddings(frames)
    (ASSETS / "embeddings.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} embedding rows")


if __name__ == "__main__":
    main()
