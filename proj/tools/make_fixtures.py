#!/usr/bin/env python3
"""Regenerates the synthetic corpora under tests/data.

smoke_posts.jsonl   300 posts from three subreddits with disjoint topic words
stats_posts.jsonl   50 plain posts for the macro statistics recount
stats_expected.json one-pass recount of stats_posts.jsonl
"""

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"

FAMILIES = {
    "opiatesrecovery": {
        "words": ["suboxone", "methadone", "taper", "clinic", "withdrawal", "buprenorphine", "induction",
                  "detox", "cravings", "sublocade"],
        "titles": ["day {n} of my {a} {b}", "{a} and {b} question", "starting {a} next week", "{a} {b} help"],
    },
    "benzorecovery": {
        "words": ["xanax", "klonopin", "valium", "panic", "benzo", "alprazolam", "clonazepam", "insomnia",
                  "seizures", "diazepam"],
        "titles": ["{a} {b} experience", "coming off {a}", "{a} and {b}", "need advice on {a}"],
    },
    "kratom": {
        "words": ["kratom", "powder", "capsules", "strain", "vendor", "maeng", "borneo", "grams", "extract",
                  "bali"],
        "titles": ["new {a} {b}", "{a} {b} review", "best {a} for {b}", "{a} from my {b}"],
    },
}

STATEMENTS = [
    "I have been on {a} for {n} weeks and the {b} is rough.",
    "Ive been reading about {a} and {b} all night.",
    "My doctor said the {a} should help with {b}.",
    "As a noob I dont know much about {a} yet.",
    "The {a} made the {b} a lot easier this time.",
    "idk if the {a} is working but the {b} is better.",
    "Yesterday I finally talked to someone about {a}.",
    "It has been {n} days since my last {a}.",
    "Honestly the {b} scared me more than the {a}.",
    "I wanted to run smthing by you guys about {a}.",
]

QUESTIONS = [
    "Does anyone know if {a} helps with {b}?",
    "How long does the {a} {b} usually last?",
    "Can I take {a} with {b}?",
    "What is the best {a} for {b}?",
    "Should I tell my doctor about the {a}?",
    "Is it normal to feel the {b} after {n} days?",
    "How do you guys deal with {a} and {b}",
    "Anyone know a good {a} near me?",
]

CLOSERS = ["Thanks in advance.", "Any advice is appreciated!", "Sorry for the long post.", "Stay strong everyone."]

RHETORICAL = ["Guess what?", "You know?", "Right?"]


def smoke_post(rng, index, subreddit):
    fam = FAMILIES[subreddit]
    words = fam["words"]

    def fill(template):
        a, b = rng.sample(words, 2)
        return template.format(a=a, b=b, n=rng.randint(2, 60))

    sentences = [fill(rng.choice(STATEMENTS)) for _ in range(rng.randint(1, 4))]
    if rng.random() < 0.2:
        sentences.insert(rng.randint(0, len(sentences)), rng.choice(RHETORICAL))
    # One post in ten has no question and drops out before summarization.
    if index % 10 != 7:
        for _ in range(rng.randint(1, 2)):
            sentences.insert(rng.randint(max(0, len(sentences) - 2), len(sentences)), fill(rng.choice(QUESTIONS)))
    if rng.random() < 0.5:
        sentences.append(rng.choice(CLOSERS))
    if rng.random() < 0.1:
        sentences.append("More info at https://example.org/{}".format(index))
    return {
        "id": "s{:03d}".format(index),
        "subreddit": subreddit,
        "title": fill(rng.choice(fam["titles"])),
        "selftext": " ".join(sentences),
        "created_utc": 1600000000 + 3600 * index,
    }


def smoke_corpus():
    rng = random.Random(20240607)
    names = sorted(FAMILIES)
    posts = []
    for i in range(300):
        if i % 25 == 3:
            posts.append({"id": "s{:03d}".format(i), "subreddit": names[i % 3], "title": "removed post",
                          "selftext": "[removed]" if i % 2 else "[deleted]", "created_utc": 1600000000 + 3600 * i})
        elif i % 50 == 11:
            posts.append({"id": "s{:03d}".format(i), "subreddit": names[i % 3], "title": "link post",
                          "selftext": "   ", "created_utc": 1600000000 + 3600 * i})
        else:
            posts.append(smoke_post(rng, i, names[i % 3]))
    return posts


# Words outside every lexicon, so expansion never changes token counts.
PLAIN = ["today", "morning", "walk", "feel", "better", "clinic", "dose", "week", "sleep", "night", "water", "food",
         "friend", "call", "work", "tired", "calm", "rain", "home", "long", "short", "slow", "fast", "good"]


def lexicon_keys():
    keys = set()
    for name in ("contractions.tsv", "abbreviations.tsv"):
        for line in (ROOT / "resources" / name).read_text(encoding="utf-8").splitlines():
            if line and not line.startswith("#"):
                keys.add(line.split("\t")[0])
    return keys


def stats_corpus():
    assert not set(PLAIN) & lexicon_keys()
    rng = random.Random(50)
    subs = ["alpha", "beta", "gamma"]
    posts = []
    for i in range(50):
        sentences = []
        for _ in range(rng.randint(1, 6)):
            body = " ".join(rng.choice(PLAIN) for _ in range(rng.randint(2, 9)))
            sentences.append(body + rng.choice([".", "?", "!", "??"]))
        text = " ".join(sentences)
        if rng.random() < 0.3:
            text = text[:-1].rstrip("?.!")  # unterminated final fragment
        if rng.random() < 0.2:
            text = text + " café"  # multi-byte code point
        posts.append({"id": "t{:02d}".format(i), "subreddit": subs[i % 3], "title": "post {}".format(i),
                      "selftext": text, "created_utc": 1700000000 + i})
    return posts


def recount(posts):
    """Counts without the library: words and marks are space/terminator separated by construction."""
    groups = {}
    for p in posts:
        text = p["selftext"]
        tokens = 0
        sentences = 0
        for chunk in text.split(" "):
            word = chunk.rstrip("?.!")
            marks = len(chunk) - len(word)
            tokens += (1 if word else 0) + marks
            if marks:
                sentences += 1
        if text and text[-1] not in "?.!":
            tokens += 1  # appended period
            sentences += 1
        row = groups.setdefault(p["subreddit"], [0, 0, 0, 0, 0])
        row[0] += 1
        row[1] += len(text)
        row[2] += tokens
        row[3] += sentences
        row[4] += text.count("?")
    out = {}
    total = [0, 0, 0, 0, 0]
    for name, row in sorted(groups.items()):
        out[name] = [row[0]] + [v / row[0] for v in row[1:]]
        total = [t + v for t, v in zip(total, row)]
    out["(all)"] = [total[0]] + [v / total[0] for v in total[1:]]
    return out


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    write_jsonl(DATA / "smoke_posts.jsonl", smoke_corpus())
    stats = stats_corpus()
    write_jsonl(DATA / "stats_posts.jsonl", stats)
    (DATA / "stats_expected.json").write_text(json.dumps(recount(stats), indent=2) + "\n", encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
