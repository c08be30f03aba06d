#!/usr/bin/env python3
"""Writes the bundled synthetic QA corpus (data/sample_corpus.jsonl). Deterministic."""
import json
import random
import sys

TOPICS = [
    ("photosynthesis", "plants convert light, water and carbon dioxide into glucose and oxygen inside their chloroplasts"),
    ("the water cycle", "water evaporates, condenses into clouds, falls as precipitation and collects again in rivers and oceans"),
    ("compound interest", "interest is added to the principal so later periods earn interest on earlier interest as well"),
    ("a binary search", "it halves a sorted range at every step, comparing the middle element with the target value"),
    ("vaccination", "a harmless antigen trains the immune system to recognise a pathogen before a real infection"),
    ("plate tectonics", "rigid lithospheric plates drift over the mantle and interact at convergent and divergent boundaries"),
    ("inflation", "a sustained rise in the general price level reduces the purchasing power of each unit of money"),
    ("a hash table", "keys are mapped by a hash function to buckets, which gives constant expected lookup time"),
    ("the French Revolution", "fiscal crisis and Enlightenment ideas led to the fall of the monarchy between 1789 and 1799"),
    ("entropy", "it measures the number of microscopic configurations compatible with a macroscopic state"),
    ("supply and demand", "prices move until the quantity buyers want matches the quantity sellers offer"),
    ("the Pythagorean theorem", "in a right triangle the square on the hypotenuse equals the sum of the squares on the legs"),
    ("DNA replication", "the helix unwinds and each strand serves as a template for a new complementary strand"),
    ("recursion", "a function solves a problem by calling itself on smaller instances until it reaches a base case"),
    ("the greenhouse effect", "gases such as carbon dioxide absorb infrared radiation and warm the lower atmosphere"),
    ("opportunity cost", "it is the value of the best alternative given up when a choice is made"),
    ("a neural network", "layers of weighted sums and nonlinearities are trained by gradient descent on a loss"),
    ("osmosis", "solvent moves through a semipermeable membrane toward the side with higher solute concentration"),
    ("the Roman Republic", "elected magistrates and a senate governed Rome before the rise of the emperors"),
    ("a mortgage", "a loan secured by real estate is repaid in instalments of principal and interest"),
]

ASK = [
    "What is {t}?",
    "Can you explain {t} in simple terms?",
    "Why does {t} matter?",
    "Describe how {t} works.",
    "Give a short overview of {t}.",
    "How would you teach {t} to a student?",
]

EXTRA = [
    "This is a standard idea in introductory courses.",
    "Examples help make the idea concrete.",
    "It connects to several related concepts.",
    "Historically it took a long time to be understood.",
    "Misconceptions about it are common.",
    "It is often tested in exams.",
]


def clean_pair(rng, i):
    topic, fact = TOPICS[i % len(TOPICS)]
    q = ASK[(i // len(TOPICS)) % len(ASK)].format(t=topic)
    a = f"In short, {fact}. {rng.choice(EXTRA)} {rng.choice(EXTRA)}"
    return q, a


def main(path):
    rng = random.Random(7)
    rows = []

    def add(q, a):
        rows.append({"id": f"s{len(rows):03d}", "question": q, "answer": a})

    clean = [clean_pair(rng, i) for i in range(110)]
    for q, a in clean:
        add(q, a)
    for q, a in rng.sample(clean, 20):  # near-duplicates
        add(q, a.replace("In short, ", "In short: ", 1))
    for q, a in rng.sample(clean, 15):  # markup noise
        add(f"<p>{q}</p>", f"<div><b>{a}</b>&nbsp;</div>")
    for q, _ in rng.sample(clean, 15):  # missing answers
        add(q, "")
    for _, a in rng.sample(clean, 5):  # missing questions
        add("", a)
    for i in range(10):  # too short
        add(f"Define item {i}?", "Yes.")
    for q, a in rng.sample(clean, 10):  # repetitive answers
        add(q, a.split(".")[0] + ". " + " ".join(["remember this point"] * 8))
    for q, a in rng.sample(clean, 5):  # symbol heavy
        add(q, a + " " + "#$%^&*@!" * 12)

    order = list(range(len(rows)))
    rng.shuffle(order)
    with open(path, "w", encoding="utf-8") as f:
        for k in order:
            f.write(json.dumps(rows[k], ensure_ascii=False, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/sample_corpus.jsonl")
