"""Regenerates the mini-corpus fixtures. Output is fixed by the seed below."""
import json
import random

SEED = 20240501
THEMES = {
    "astronomy": "telescope galaxy planet orbit comet nebula stellar asteroid cosmic lunar solar eclipse meteor observatory spectrum".split(),
    "cooking": "recipe oven flour butter garlic simmer sauce roast pastry spice onion bake skillet dough broth".split(),
    "football": "goal striker referee penalty league midfield keeper stadium tackle match coach season transfer trophy derby".split(),
    "finance": "stock bond dividend investor market equity inflation portfolio interest broker hedge yield currency trading capital".split(),
    "medicine": "patient clinic vaccine doctor therapy diagnosis surgery hospital symptom dose nurse infection treatment chronic disease".split(),
    "gardening": "soil seed compost bloom prune mulch tomato garden shrub weed fertilizer harvest greenhouse root sprout".split(),
    "music": "guitar melody chord rhythm album concert drummer lyric tempo violin orchestra singer chorus band piano".split(),
    "sailing": "vessel harbor anchor sail mast voyage tide captain deck hull wind crew port rudder knot".split(),
}
# Theme prevalence, uneven so the reference topics have different sizes.
PREVALENCE = [0.22, 0.18, 0.15, 0.12, 0.11, 0.09, 0.08, 0.05]
FILLER = "the a of and to in is was for on with as by at from this that it new report said people year time day way many".split()
STOPWORDS = "the a of and to in is was for on with as by at from this that it".split()


def main():
    rng = random.Random(SEED)
    names = list(THEMES)
    docs = []
    for d in range(200):
        primary = rng.choices(range(len(names)), weights=PREVALENCE)[0]
        secondary = rng.randrange(len(names))
        mix = {primary: 0.75, secondary: 0.25} if secondary != primary else {primary: 1.0}
        length = rng.randint(40, 90)
        words = []
        for _ in range(length):
            if rng.random() < 0.25:
                words.append(rng.choice(FILLER))
            else:
                t = rng.choices(list(mix), weights=list(mix.values()))[0]
                vocab = THEMES[names[t]]
                # Zipf-like preference for the first words of each theme.
                words.append(vocab[min(int(rng.expovariate(0.25)), len(vocab) - 1)])
        title = f"{names[primary].title()} note {d}"
        docs.append({"id": f"doc{d:03d}", "title": title, "text": " ".join(words), "_primary": primary})

    with open("mini_corpus.jsonl", "w") as f:
        for doc in docs:
            f.write(json.dumps({k: doc[k] for k in ("id", "title", "text")}) + "\n")
    with open("stopwords.txt", "w") as f:
        f.write("\n".join(STOPWORDS) + "\n")
    prefs = ["words", "docs", "both"]
    with open("refset_annotations.jsonl", "w") as f:
        for t, name in enumerate(names):
            members = [d["id"] for d in docs if d["_primary"] == t][:6]
            rec = {
                "label": name,
                "category": "leisure" if name in ("cooking", "gardening", "music", "sailing") else "science_business",
                "preference": prefs[t % 3],
                "words": THEMES[name][:10],
                "docs": members,
            }
            f.write(json.dumps(rec) + "\n")


if __name__ == "__main__":
    main()
