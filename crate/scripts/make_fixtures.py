#!/usr/bin/env python3
"""Regenerates the deterministic test fixtures under fixtures/.

Outputs:
  embeddings.txt     topic-clustered 16-d word vectors
  corpus/            56 HTML news pages plus manifest.json (fixture search index)
  extraction/        10 HTML pages with golden body text, one sentence per line
  sadhan_toy/        small labelled claim/evidence dataset in the training layout
  articles/          plain-text articles for claim ranking

The segmentation fixture (segmentation/) is written by hand and is not
touched by this script.
"""

import json
import math
import random
import shutil
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures"
DIM = 16
SEED = 20190127

TOPICS = {
    "economy": "unemployment jobs wages inflation economy workers employers payroll hiring salaries "
    "recession growth labor income paychecks".split(),
    "health": "hospital vaccine doctors patients insurance medicaid clinic disease treatment nurses "
    "medicine coverage prescription surgery healthcare".split(),
    "climate": "emissions carbon climate warming temperatures coal renewable solar wind pollution "
    "glaciers drought sea-level fossil greenhouse".split(),
    "education": "schools teachers students tuition classrooms college graduation curriculum "
    "universities enrollment literacy homework principals scholarships kindergarten".split(),
    "crime": "police crime arrests prison homicide burglary officers sentencing courts violence "
    "robbery detectives jail prosecutors offenders".split(),
    "immigration": "immigrants border visas asylum deportation citizenship migrants refugees customs "
    "green-card naturalization detention passports amnesty immigration".split(),
    "housing": "rent mortgage housing homeowners tenants eviction apartments landlords zoning "
    "foreclosure construction neighborhoods property affordability homelessness".split(),
    "transport": "highway transit railway buses traffic bridges airports commuters subway "
    "infrastructure roads fares congestion trains freeway".split(),
}
GENERIC = (
    "said report according officials year percent new study data figures government state city "
    "local million billion increase decrease rose fell claims confirmed debunked statement record "
    "analysis week public program plan budget spending federal county council governor senator "
    "mayor president campaign voters policy law bill agency survey".split()
)
STOPWORDS = (
    "the a an of to in and for on with by at from that this is was were are be has have had it "
    "its as than over since about their they he she we our not but or which who will would more "
    "most".split()
)

SITES = [
    ("www.dailyledger.example", "Daily Ledger"),
    ("news.metrowire.example", "Metro Wire"),
    ("www.civicpost.example", "Civic Post"),
    ("factdesk.example", "Fact Desk"),
    ("www.heraldtribune.example", "Herald Tribune"),
    ("www.northstar-news.example", "Northstar News"),
    ("localbeat.example", "Local Beat"),
]
AUTHORS = ["Maria Lopez", "James Carter", "Priya Nair", "Tom Becker", "Aiko Tanaka", "Sam Okafor"]


def unit(rng, dim):
    v = [rng.gauss(0, 1) for _ in range(dim)]
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def noisy(rng, base, scale):
    return [b + rng.gauss(0, scale / math.sqrt(DIM)) for b in base]


def write_embeddings(rng):
    lines = []
    centroids = {t: unit(rng, DIM) for t in TOPICS}
    for topic, words in TOPICS.items():
        for w in words:
            lines.append((w, noisy(rng, centroids[topic], 0.3)))
    for w in GENERIC:
        lines.append((w, noisy(rng, [0.0] * DIM, 0.6)))
    for w in STOPWORDS:
        lines.append((w, noisy(rng, [0.0] * DIM, 0.15)))
    with open(ROOT / "embeddings.txt", "w") as f:
        for w, v in lines:
            f.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")


def sentence(rng, topic, n_topic, n_generic, n_stop):
    words = (
        rng.sample(TOPICS[topic], n_topic)
        + rng.sample(GENERIC, n_generic)
        + rng.sample(STOPWORDS, n_stop)
    )
    rng.shuffle(words)
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def article_sentences(rng, topic):
    out = []
    for _ in range(rng.randint(8, 14)):
        kind = rng.random()
        if kind < 0.55:
            out.append(sentence(rng, topic, rng.randint(3, 5), rng.randint(0, 2), rng.randint(1, 3)))
        elif kind < 0.75:
            out.append(sentence(rng, topic, rng.randint(1, 2), rng.randint(2, 4), rng.randint(1, 3)))
        elif kind < 0.9:
            other = rng.choice([t for t in TOPICS if t != topic])
            out.append(sentence(rng, other, 3, 1, 2))
        else:
            out.append(sentence(rng, topic, 0, rng.randint(3, 5), rng.randint(1, 3)))
    return out


def html_page(title, author, date, paragraphs):
    body = "\n".join(f"    <p>{p}</p>" for p in paragraphs)
    return f"""<!DOCTYPE html>
<html lang="en">
<head>
  <meta charset="utf-8">
  <title>{title}</title>
  <meta name="author" content="{author}">
  <meta property="article:published_time" content="{date}T08:30:00Z">
  <style>p {{ margin: 0 0 1em; }}</style>
  <script>window.dataLayer = window.dataLayer || [];</script>
</head>
<body>
  <nav><a href="/">Home</a> <a href="/politics">Politics</a> <p>Subscribe for updates.</p></nav>
  <header><h1>{title}</h1></header>
  <article>
{body}
  </article>
  <aside><p>Related stories you might like.</p></aside>
  <footer><p>Copyright 2019. All rights reserved.</p></footer>
</body>
</html>
"""


def write_corpus(rng):
    out = ROOT / "corpus"
    out.mkdir()
    manifest = {}
    for topic in TOPICS:
        for i in range(7):
            name = f"{topic}_{i + 1:02d}.html"
            host, outlet = rng.choice(SITES)
            sents = article_sentences(rng, topic)
            cut = sorted(rng.sample(range(1, len(sents)), 2))
            paragraphs = [" ".join(sents[: cut[0]]), " ".join(sents[cut[0] : cut[1]]), " ".join(sents[cut[1] :])]
            title = f"{outlet}: {topic.capitalize()} report {i + 1}"
            date = f"2019-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
            (out / name).write_text(html_page(title, rng.choice(AUTHORS), date, paragraphs))
            manifest[name] = {"url": f"https://{host}/{topic}/{2019}/{name[:-5]}", "title": title}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# Each extraction page exercises a different markup feature.
EXTRACTION_VARIANTS = [
    "plain",
    "inline",
    "entities",
    "boilerplate",
    "script_in_body",
    "nested_divs",
    "br_inside",
    "meta_time",
    "long",
    "mixed",
]


def write_extraction(rng):
    out = ROOT / "extraction"
    out.mkdir()
    for i, variant in enumerate(EXTRACTION_VARIANTS):
        topic = list(TOPICS)[i % len(TOPICS)]
        sents = article_sentences(rng, topic)
        if variant == "long":
            sents += article_sentences(rng, topic)
        if variant == "entities":
            # every sentence gets an ampersand; the page escapes it
            sents = [s[:-1] + " & more." for s in sents]
        golden = list(sents)
        paras = [sents[j : j + 3] for j in range(0, len(sents), 3)]
        rendered = []
        for p in paras:
            if variant == "inline":
                w = p[0].split()
                p0 = " ".join([f"<em>{w[0]}</em>"] + w[1:2] + [f'<a href="/x">{" ".join(w[2:])}</a>'])
                text = " ".join([p0] + p[1:])
            elif variant == "entities":
                text = " ".join(p).replace("&", "&amp;")
            elif variant == "br_inside":
                text = "<br>".join(p)
            elif variant == "mixed":
                text = f"<strong>{p[0]}</strong> " + " ".join(p[1:])
            else:
                text = " ".join(p)
            rendered.append(text)
        title = f"Extraction sample {i + 1}"
        extra_head = ""
        extra_body_top = ""
        extra_body_bottom = ""
        if variant == "boilerplate":
            extra_body_top = "<form><p>Sign in to comment.</p></form>"
            extra_body_bottom = "<aside><p>Advertisement.</p></aside>"
        if variant == "script_in_body":
            extra_body_top = "<script>var tracking = '<p>not text</p>';</script><noscript><p>Enable JS.</p></noscript>"
        date_html = ""
        if variant == "meta_time":
            date_html = '<time datetime="2018-11-06">November 6</time>'
        else:
            extra_head = '<meta name="date" content="2019-05-02">'
        if variant == "nested_divs":
            body = "\n".join(f"<div class='c'><div><p>{t}</p></div></div>" for t in rendered)
        else:
            body = "\n".join(f"<p>{t}</p>" for t in rendered)
        html = f"""<html><head><title>{title}</title>{extra_head}
<meta name="author" content="{rng.choice(AUTHORS)}"></head>
<body><nav><p>Menu</p></nav>{extra_body_top}{date_html}
<main>
{body}
</main>{extra_body_bottom}
<footer><p>Contact us.</p></footer></body></html>
"""
        (out / f"page_{i + 1:02d}.html").write_text(html)
        (out / f"page_{i + 1:02d}.txt").write_text("\n".join(golden) + "\n")


def write_sadhan_toy(rng):
    out = ROOT / "sadhan_toy"
    out.mkdir()
    support = ["confirmed", "record", "data", "figures", "analysis"]
    refute = ["debunked", "claims", "statement", "campaign", "voters"]
    topics = list(TOPICS)
    for i in range(16):
        topic = topics[i % len(topics)]
        label = "true" if i % 2 == 0 else "false"
        d = out / f"example_{i:03d}"
        (d / "evidence").mkdir(parents=True)
        (d / "claim.txt").write_text(sentence(rng, topic, 3, 1, 2) + "\n")
        (d / "label").write_text(label + "\n")
        aspects = f"author={rng.choice(AUTHORS)}\ntopic={topic}\n"
        if i % 4 == 0:
            aspects += f"domain={rng.choice(SITES)[0].removeprefix('www.')}\n"
        (d / "aspects").write_text(aspects)
        cues = support if label == "true" else refute
        for j in range(2):
            lines = [
                sentence(rng, topic, 3, 1, 2),
                " ".join(rng.sample(cues, 3)).capitalize() + " " + " ".join(rng.sample(TOPICS[topic], 2)) + ".",
                sentence(rng, topic, 2, 2, 2),
            ]
            (d / "evidence" / f"doc_{j:02d}.txt").write_text("\n".join(lines) + "\n")


PLANTED = """Unemployment fell 12 percent since 2010.

Thank you all for coming out tonight! What a wonderful crowd we have here. I think we need to keep talking about the future.

Let me be clear about how I feel. We will see what happens next. I love this great community.

Are you ready for real change? That is a great question. I want to thank my family.

Let us get to work together.
"""


def write_articles():
    out = ROOT / "articles"
    out.mkdir()
    (out / "planted_claim.txt").write_text(PLANTED)


def main():
    rng = random.Random(SEED)
    for sub in ["corpus", "extraction", "sadhan_toy", "articles"]:
        shutil.rmtree(ROOT / sub, ignore_errors=True)
    ROOT.mkdir(exist_ok=True)
    write_embeddings(rng)
    write_corpus(rng)
    write_extraction(rng)
    write_sadhan_toy(rng)
    write_articles()


if __name__ == "__main__":
    main()
