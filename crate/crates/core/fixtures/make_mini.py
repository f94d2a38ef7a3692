"""Regenerates the bundled mini fixtures in ./mini (deterministic)."""
import csv
import json
import random
from pathlib import Path

TOPICS = {
    "cloud": "software cloud platform api analytics database server hosting saas developer",
    "commerce": "retail shopping marketplace customers merchants checkout ecommerce store brands orders",
    "health": "patients clinic doctors hospital diagnosis therapy medical care nurses treatment",
    "biotech": "genomics protein vaccine antibody molecule enzyme clinical trial drug assay",
    "energy": "solar battery grid electricity renewable wind storage charging turbine power",
    "mobility": "delivery logistics drivers fleet vehicles ride routing shipping trucks warehouse",
    "hardware": "sensor semiconductor chip wireless lidar robotics device circuit antenna processor",
    "finance": "payments banking lending loans credit insurance wallet invest fintech transactions",
}
POSITIVE = "gain win profit bull optimistic worthy profitable growth success upside".split()
NEGATIVE = "lose loss default bear pessimistic worthless unprofitable decline failure downside".split()
TECH = {"cloud", "biotech", "energy", "hardware"}
FILLER = "the and of a to in company new with for".split()
YEARS = [2014, 2015, 2016]
INDUSTRIES = {"cloud": "software", "finance": "software", "commerce": "consumer", "mobility": "consumer",
              "health": "health", "biotech": "health", "energy": "industrial", "hardware": "industrial"}

rng = random.Random(20240611)
out = Path(__file__).parent / "mini"
words = {k: v.split() for k, v in TOPICS.items()}
names = sorted(words)


def corpus():
    docs = []
    for year in YEARS:
        for i in range(240):
            main = rng.choice(names)
            second = rng.choice(names)
            toks = []
            for _ in range(24):
                r = rng.random()
                if r < 0.70:
                    toks.append(rng.choice(words[main]))
                elif r < 0.85:
                    toks.append(rng.choice(words[second]))
                else:
                    toks.append(rng.choice(FILLER))
            if rng.random() < 0.3:
                pole = POSITIVE if rng.random() < 0.5 else NEGATIVE
                toks = [rng.choice(pole) if rng.random() < 0.5 else t for t in toks]
            # "amazon" migrates from commerce to cloud in the last slice
            if main == ("cloud" if year == 2016 else "commerce"):
                toks.insert(rng.randrange(len(toks)), "amazon")
                toks.insert(rng.randrange(len(toks)), "amazon")
            source = "patent" if main in TECH and rng.random() < 0.5 else "news"
            docs.append({"id": f"d{year}-{i:03d}", "year": year, "source": source, "text": " ".join(toks)})
    with open(out / "corpus.jsonl", "w") as f:
        for d in docs:
            f.write(json.dumps(d) + "\n")


def date(y, m, d=1):
    return f"{y:04d}-{m:02d}-{d:02d}"


def add_months(y, m, k):
    m0 = y * 12 + (m - 1) + k
    return m0 // 12, m0 % 12 + 1


def investors(n):
    pool = names + ["consumer", "enterprise", "deeptech"]
    return [{"id": f"vc{rng.randrange(30)}", "keywords": rng.sample(pool, 2)} for _ in range(n)]


def companies():
    rows = []
    for i in range(40):
        topics = rng.sample(names, rng.choice([1, 2, 3]))
        desc = [rng.choice(words[t]) for t in topics for _ in range(rng.randint(3, 5))]
        if rng.random() < 0.2:
            desc.append("zyxquantum")
        fy, fm = rng.choice([2013, 2014, 2015, 2016]), rng.randint(1, 12)
        events = []
        y, m = add_months(fy, fm, rng.randint(4, 14))
        events.append({"type": "seed", "date": date(y, m, 3), "investors": investors(rng.randint(1, 3))})
        if rng.random() < 0.7:
            y, m = add_months(y, m, rng.randint(6, 18))
            events.append({"type": "series_a", "date": date(y, m, 10), "investors": investors(rng.randint(2, 4))})
        r = rng.random()
        y, m = add_months(y, m, rng.randint(8, 30))
        if r < 0.15:
            events.append({"type": "ipo", "date": date(y, m, 15)})
        elif r < 0.45:
            price = None if rng.random() < 0.2 else float(rng.randint(5, 400)) * 1e6
            events.append({"type": "acquisition", "date": date(y, m, 15), "price_usd": price})
        elif r < 0.6:
            events.append({"type": "closure", "date": date(y, m, 20)})
        rec = {"id": f"c{i:02d}", "description": " ".join(desc), "founded": date(fy, fm),
               "industry": INDUSTRIES[topics[0]], "events": events}
        if i % 8 == 0:
            extra = [rng.choice(words[rng.choice(names)]) for _ in range(4)]
            rec["snapshots"] = [{"date": date(fy, 6), "text": " ".join(desc)},
                                {"date": date(fy + 2, 6), "text": " ".join(desc + extra)}]
        rows.append(rec)
    # a revival after closing is ignored
    rows[1]["events"] = [{"type": "seed", "date": "2014-03-01", "investors": investors(2)},
                         {"type": "closure", "date": "2015-05-01"},
                         {"type": "later_round", "date": "2016-01-01", "investors": investors(1)}]
    rows[1]["founded"] = "2013-06-01"
    # out-of-order events are rejected
    rows[2]["events"] = [{"type": "series_a", "date": "2016-03-01", "investors": investors(2)},
                         {"type": "seed", "date": "2015-01-01", "investors": investors(1)}]
    rows[2]["founded"] = "2014-01-01"
    with open(out / "companies.jsonl", "w") as f:
        for r in rows:
            f.write(json.dumps(r) + "\n")


def lexicon():
    # the first three words of every topic are curated technology terms
    terms = sorted(w for t in names for w in words[t][:3])
    (out / "tech_terms.txt").write_text("# curated technology terms\n" + "\n".join(terms) + "\n")
    vocab = sorted({w for ws in words.values() for w in ws})
    with open(out / "general_freq.csv", "w", newline="") as g, open(out / "patent_freq.csv", "w", newline="") as p:
        gw, pw = csv.writer(g), csv.writer(p)
        gw.writerow(["term", "count"])
        pw.writerow(["term", "count"])
        for w in vocab:
            tech = any(w in words[t] for t in TECH)
            gw.writerow([w, 200 if tech else 2000])
            pw.writerow([w, 9000 if tech else 300])


def cpi():
    with open(out / "cpi.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["year", "index"])
        index = 218.1
        for year in range(2010, 2022):
            w.writerow([year, round(index, 1)])
            index *= 1.021


if __name__ == "__main__":
    out.mkdir(exist_ok=True)
    corpus()
    companies()
    lexicon()
    cpi()
