#!/usr/bin/env python3
"""Writes the four-year toy fixture under data/toy/<year>/.

Twelve entities per year drawn from a pool of ambiguous names, eight triples
per year (some pointing at entities absent that year), and short mention
contexts. Output is fully deterministic.
"""

import pathlib
import sys

POOL = {
    "Q100": ("Apple Inc.", "American technology company that designs phones and computers."),
    "Q101": ("Apple", "Edible fruit of the apple tree, grown in orchards."),
    "Q102": ("Amazon", "American technology company focused on online retail and cloud computing."),
    "Q103": ("Amazon River", "Large river in South America flowing through the rainforest."),
    "Q104": ("Jaguar", "Large cat native to the Americas, living in the rainforest."),
    "Q105": ("Jaguar Cars", "British car company known for luxury vehicles."),
    "Q106": ("Mercury", "Smallest planet in the solar system and closest to the sun."),
    "Q107": ("Mercury", "Chemical element that is a liquid metal at room temperature."),
    "Q108": ("Python", "Large snake found in tropical regions of Africa and Asia."),
    "Q109": ("Python", "Programming language used for computing and data science."),
    "Q110": ("Java", "Island of Indonesia with a large population."),
    "Q111": ("Java", "Programming language used for enterprise computing and phones."),
    "Q112": ("Corona", "Beer brewed in Mexico and sold worldwide."),
    "Q113": ("COVID-19", "Disease caused by a coronavirus that spread worldwide in 2020."),
    "Q114": ("Zoom", "Video meeting company whose software spread during the pandemic."),
    "Q115": ("Tesla", "American car company that builds electric vehicles."),
}

# Later-year rewrites of a few descriptions.
REVISIONS = {
    (2021, "Q112"): "Beer brewed in Mexico and sold worldwide; the name is also shared with the coronavirus.",
    (2022, "Q109"): "Programming language used for computing, data science and machine learning.",
    (2022, "Q102"): "American technology company focused on online retail, cloud computing and video.",
}

YEARS = {
    2019: (["Q100", "Q101", "Q102", "Q103", "Q104", "Q105", "Q106", "Q107", "Q108", "Q109", "Q110", "Q111"],
           {"Q109", "Q110", "Q111"}),
    2020: (["Q100", "Q101", "Q102", "Q103", "Q104", "Q105", "Q106", "Q107", "Q108", "Q109", "Q112", "Q113"],
           {"Q112", "Q113"}),
    2021: (["Q100", "Q101", "Q102", "Q103", "Q104", "Q105", "Q106", "Q107", "Q108", "Q112", "Q113", "Q114"],
           {"Q114"}),
    2022: (["Q100", "Q101", "Q102", "Q103", "Q104", "Q105", "Q106", "Q107", "Q112", "Q113", "Q114", "Q115"],
           {"Q115"}),
}

TRIPLES = [
    ("Q100", "P452", "Q102"),
    ("Q101", "P361", "Q103"),
    ("Q103", "P30", "Q104"),
    ("Q105", "P452", "Q115"),
    ("Q106", "P398", "Q107"),
    ("Q108", "P138", "Q109"),
    ("Q110", "P17", "Q999"),
    ("Q111", "P737", "Q109"),
    ("Q112", "P1889", "Q113"),
    ("Q113", "P1542", "Q114"),
    ("Q114", "P452", "Q100"),
    ("Q104", "P1889", "Q105"),
]

# (left context, right context) templates; {d0}.. are description words.
TRAIN_CONTEXTS = [
    ("people talked about", "and its {d0} {d1}"),
    ("a report on the", "mentioned {d2} and {d3}"),
]
TEST_CONTEXTS = [("news about", "with {d1} {d3}")]


def description(year, qid):
    return REVISIONS.get((year, qid), POOL[qid][1])


def words(text):
    return [w.strip(".,;").lower() for w in text.split() if w.strip(".,;")]


def mention_lines(year, qids, new, contexts):
    out = []
    for qid in qids:
        title, _ = POOL[qid]
        surface = title.split()[0]
        w = words(description(year, qid))
        fill = {f"d{i}": w[i % len(w)] for i in range(4)}
        cat = "new" if qid in new else "continual"
        for left, right in contexts:
            out.append("\t".join([qid, cat, left, surface, right.format(**fill)]))
    return out


def main(root):
    root = pathlib.Path(root)
    for year, (qids, new) in YEARS.items():
        d = root / str(year)
        d.mkdir(parents=True, exist_ok=True)
        ents = [f"{q}\t{POOL[q][0]}\t{description(year, q)}" for q in qids]
        (d / "entities.tsv").write_text("\n".join(ents) + "\n")
        (d / "mentions.tsv").write_text("\n".join(mention_lines(year, qids, new, TRAIN_CONTEXTS)) + "\n")
        (d / "test_mentions.tsv").write_text("\n".join(mention_lines(year, qids, new, TEST_CONTEXTS)) + "\n")
        offset = year - 2019
        picked = [TRIPLES[(offset * 3 + i) % len(TRIPLES)] for i in range(8)]
        (d / "triples.tsv").write_text("\n".join("\t".join(t) for t in picked) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parent.parent / "data" / "toy")
