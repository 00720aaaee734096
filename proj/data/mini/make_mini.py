"""Regenerates the bundled mini corpus (dataset, embeddings, lexicon).

Embeddings are synthetic: each question has a topic direction; its content
words lie near it and its answer words lie further along it, so the
untrained toy model already answers most questions.
"""
import json
import random
import re

DIM = 16
SEED = 7

# (id, context, question, answer, topic words)
EXAMPLES = [
    ("mini-01",
     "In 1939 Warsaw was a large city. About 1300000 people lived in Warsaw in 1939, "
     "and many of them worked in small factories.",
     "How many people lived in Warsaw in 1939?", "1300000",
     ["people", "lived", "warsaw"]),
    ("mini-02",
     "The Vistula is the longest river in Poland. It flows through Krakow and Warsaw "
     "before it reaches the Baltic Sea.",
     "Which river is the longest in Poland?", "Vistula",
     ["river", "longest", "poland"]),
    ("mini-03",
     "Marie Curie was born in Warsaw. She studied physics in Paris and won the Nobel "
     "Prize twice.",
     "Where did Marie Curie study physics?", "Paris",
     ["curie", "study", "physics"]),
    ("mini-04",
     "Chopin wrote many pieces for the piano. His mazurkas use rhythms from Polish "
     "folk dances.",
     "Which instrument did Chopin write for?", "piano",
     ["instrument", "chopin", "write"]),
    ("mini-05",
     "The castle was rebuilt after the war. Work on the roof finished in 1984, and "
     "the museum opened soon after.",
     "When did work on the roof finish?", "1984",
     ["work", "roof", "finish"]),
    ("mini-06",
     "Bread in the old town is baked every morning. The bakers use rye flour from "
     "farms near the river.",
     "What flour do the bakers use?", "rye",
     ["flour", "bakers", "use"]),
    ("mini-07",
     "The tram network has twenty lines. Trams are painted yellow and red, the "
     "colours of the city.",
     "What colour are the trams painted?", "yellow",
     ["colour", "trams", "painted"]),
    ("mini-08",
     "The library keeps old maps in its basement. Visitors may read the maps but "
     "cannot borrow them.",
     "Where does the library keep old maps?", "basement",
     ["library", "keep", "maps"]),
    ("mini-09",
     "The bridge crosses the river at its narrowest point. Engineers built it from "
     "steel in three years.",
     "What material did engineers build the bridge from?", "steel",
     ["material", "engineers", "bridge"]),
    ("mini-10",
     "Most students travel to school by bus. In winter some of them ski along the "
     "frozen paths.",
     "How do most students travel to school?", "bus",
     ["students", "travel", "school"]),
]

LEXICON = {
    "people": ["citizens", "persons", "inhabitants"],
    "lived": ["resided", "dwelt"],
    "river": ["stream"],
    "longest": ["lengthiest"],
    "physics": ["natural philosophy", "mechanics"],
    "study": ["learn"],
    "instrument": ["tool"],
    "chopin": [],
    "roof": ["roofing"],
    "finish": ["end", "complete"],
    "flour": ["meal"],
    "bakers": ["breadmakers"],
    "colour": ["color", "hue"],
    "trams": ["streetcars"],
    "painted": ["coloured"],
    "maps": ["charts"],
    "library": ["archive"],
    "keep": ["store"],
    "material": ["substance"],
    "bridge": ["span"],
    "engineers": ["builders"],
    "students": ["pupils", "learners"],
    "travel": ["commute", "go"],
}

TOKEN = re.compile(r"[A-Za-z0-9]+|[^\sA-Za-z0-9]")


def tokens(text):
    return [t.lower() for t in TOKEN.findall(text)]


def unit_gauss(rng):
    v = [rng.gauss(0, 1) for _ in range(DIM)]
    n = sum(x * x for x in v) ** 0.5
    return [x / n for x in v]


def main():
    rng = random.Random(SEED)
    counts = {}
    for _, ctx, q, _, _ in EXAMPLES:
        for t in tokens(ctx) + tokens(q):
            counts[t] = counts.get(t, 0) + 1
    for syns in LEXICON.values():
        for s in syns:
            for t in tokens(s):
                counts.setdefault(t, 0)
    counts.setdefault("random", 0)
    counts.setdefault("those", 0)

    vectors = {w: unit_gauss(rng) for w in sorted(counts)}
    for _, _, _, answer, topic_words in EXAMPLES:
        topic = unit_gauss(rng)
        for w in topic_words:
            noise = unit_gauss(rng)
            vectors[w] = [t + 1.0 * e for t, e in zip(topic, noise)]
        for w in tokens(answer):
            noise = unit_gauss(rng)
            vectors[w] = [1.5 * t + 0.3 * e for t, e in zip(topic, noise)]
    # "those" sits right next to "people"
    vectors["those"] = [p + 0.05 * e for p, e in zip(vectors["people"], unit_gauss(rng))]

    ranked = sorted(counts, key=lambda w: (-counts[w], w))
    with open("mini_glove.txt", "w") as f:
        for w in ranked:
            f.write(w + " " + " ".join("%.5f" % x for x in vectors[w]) + "\n")

    data = {"version": "1.1", "data": [{"title": "mini", "paragraphs": []}]}
    for i, ctx, q, answer, _ in EXAMPLES:
        data["data"][0]["paragraphs"].append({
            "context": ctx,
            "qas": [{"id": i, "question": q,
                     "answers": [{"text": answer, "answer_start": ctx.index(answer)}]}],
        })
    with open("mini_squad.json", "w") as f:
        json.dump(data, f, indent=1)
        f.write("\n")

    with open("mini_lexicon.tsv", "w") as f:
        for head in sorted(LEXICON):
            f.write(head + "\t" + ",".join(LEXICON[head]) + "\n")


if __name__ == "__main__":
    main()
