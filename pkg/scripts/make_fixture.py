"""Regenerate the bundled synthetic fixture dataset (seeded, 100 records).

Per-model mean scores mimic a negative log-likelihood quality scale in
the -2.7 .. -3.9 range. The data is entirely synthetic.
"""

import json
import random

OUT = "src/blendkit/data/fixture.jsonl"
SEED = 20240517

MODELS = {
    "toy-tiny": -3.9,
    "toy-small": -3.4,
    "toy-medium": -3.0,
    "toy-large": -2.7,
}

TOPICS = [
    "the history of the printing press",
    "how photosynthesis works",
    "the rules of chess",
    "why the sky is blue",
    "the causes of inflation",
    "how vaccines train the immune system",
    "the water cycle",
    "how compilers optimize code",
    "the difference between weather and climate",
    "how birds navigate during migration",
]

TEMPLATES = [
    "Explain {topic} in simple terms.",
    "Write a short summary about {topic}.",
    "Give three interesting facts about {topic}.",
    "Compose a paragraph describing {topic} for a newsletter.",
    "What should a beginner know about {topic}? Provide a concise overview.",
]

INPUTS = [
    "",
    "Keep the answer under one hundred words.",
    "The audience is a classroom of curious middle-school students.",
    "Assume the reader has no technical background at all.",
]


def main():
    rng = random.Random(SEED)
    with open(OUT, "w", encoding="utf-8") as fh:
        for i in range(100):
            topic = rng.choice(TOPICS)
            instruction = rng.choice(TEMPLATES).format(topic=topic)
            extra = rng.choice(INPUTS)
            candidates = []
            for name, mean in MODELS.items():
                score = rng.gauss(mean, 0.4)
                candidates.append({
                    "model": name,
                    "text": f"{name} answer about {topic} (record {i}).",
                    "oracle_score": round(score, 4),
                })
            rec = {
                "query_id": f"fixture-{i:03d}",
                "instruction": instruction,
                "input": extra,
                "candidates": candidates,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    print(f"wrote 100 records to {OUT}")


if __name__ == "__main__":
    main()
