from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from doppel.corpus import Discussion
from doppel.preprocess import PreparedDoc

EPOCH = datetime(2021, 1, 1, tzinfo=timezone.utc)


def make_discussion(
    i: int,
    project: str = "acme",
    category: str = "q-a",
    title: str | None = None,
    body: str = "body text",
    hours: int | None = None,
    url: str | None = None,
) -> Discussion:
    return Discussion(
        id=i,
        project=project,
        category=category,
        author=f"user{i}",
        created_at=EPOCH + timedelta(hours=i if hours is None else hours),
        title=title if title is not None else f"title {i}",
        body=body,
        url=url if url is not None else f"https://forum.example/{project}/{i}",
    )


def make_doc(i: int, text: str, hours: int | None = None, project: str = "acme") -> PreparedDoc:
    return PreparedDoc(
        discussion_id=i,
        project=project,
        created_at=EPOCH + timedelta(hours=i if hours is None else hours),
        text=text,
    )


def random_docs(rng: random.Random, n: int, vocab: int = 400, tokens: int = 8) -> list[PreparedDoc]:
    """Synthetic prepared docs with random vocab overlap."""
    words = [f"w{j}" for j in range(vocab)]
    docs = []
    for i in range(n):
        chosen = rng.sample(words, tokens)
        docs.append(make_doc(i + 1, " ".join(chosen), hours=rng.randrange(10_000)))
    return docs


def planted_corpus(seed: int = 1) -> tuple[list[Discussion], set[tuple[int, int]]]:
    """30 discussions; 4 pairs are engineered near-duplicates.

    Tokens are letter-only (digits would not survive preprocessing) and
    end in 'o' so no lemma rule rewrites them. Every background post
    carries two universal words plus its own vocabulary of varied length,
    giving a low, continuously spread similarity band; each planted pair
    shares 11 of 12 content words, far above any fence. Verified to yield
    exactly the planted pairs for every K from 1 to 29 at dim 512.
    """
    rng = random.Random(seed)
    letters = "abcdefghijklmnopqrstuvwxyz"
    discussions: list[Discussion] = []
    next_id = 1

    def add(words: list[str]) -> int:
        nonlocal next_id
        i = next_id
        next_id += 1
        discussions.append(
            make_discussion(i, title=" ".join(words[:3]), body=" ".join(words[3:]), hours=i)
        )
        return i

    universal = ["alphao", "betao"]
    for b in range(22):
        length = rng.randint(9, 16)
        words = universal + [f"pool{letters[b]}o"]
        words += [f"uniq{letters[b]}{letters[j]}o" for j in range(length - 3)]
        add(words)

    planted: set[tuple[int, int]] = set()
    for p in range(4):
        base = [f"dup{letters[p]}{letters[j]}o" for j in range(12)]
        master = add(base)
        variant = base[:-1] + [f"dup{letters[p]}alto"]
        target = add(variant)
        planted.add((master, target))
    return discussions, planted


PLANTED_DIM = 512


def hub_corpus(seed: int = 2, n: int = 40) -> list[Discussion]:
    """Hub-structured corpus whose fence falls as K grows.

    Every post shares a prefix of a global word list (its 'hubness'), so
    deeper neighbor ranks shift all quartiles down in parallel: the fence
    decreases from K=5 to K=10 while the IQR stays put, and the candidate
    set grows -- the behavior the reference statistics rows exhibit.
    """
    rng = random.Random(seed)
    letters = "abcdefghijklmnopqrstuvwxyz"
    hub_words = [f"hub{letters[i]}o" for i in range(12)]
    discussions = []
    for i in range(1, n + 1):
        m = rng.randint(4, 9)
        fill = rng.randint(3, 6)
        suffix = "o" if i <= 26 else "y"
        words = hub_words[:m] + [
            f"fil{letters[(i - 1) % 26]}{letters[j]}{suffix}" for j in range(fill)
        ]
        discussions.append(
            make_discussion(i, title=" ".join(words[:3]), body=" ".join(words[3:]), hours=i)
        )
    return discussions


@pytest.fixture
def tmp_corpus(tmp_path: Path):
    """Write a corpus to disk and hand back (path, discussions, planted pairs)."""
    from doppel.corpus import save_corpus

    discussions, planted = planted_corpus()
    path = tmp_path / "corpus.jsonl"
    save_corpus(discussions, path)
    return path, discussions, planted
