"""Synthetic Polish-like/English-like parallel corpus with tagger annotations.

Polish side: case-inflected nouns and adjectives, gendered past tense,
genitive objects under negation and free constituent order. English side:
fixed SVO order with articles. A small share of raw lines carries markup,
stray symbols, duplicates or excessive length so cleaning has work to do.
"""

from __future__ import annotations

import random
from pathlib import Path
from xml.sax.saxutils import escape

from .morpho import MARKER

SEED = 20140301
N_PAIRS = 1000
N_LM_EXTRA = 400
SAMPLE_LINES = 40

# lemma, gender, nom, acc, gen, english
NOUNS = [
    ("kot", "m2", "kot", "kota", "kota", "cat"),
    ("pies", "m2", "pies", "psa", "psa", "dog"),
    ("chłopiec", "m1", "chłopiec", "chłopca", "chłopca", "boy"),
    ("nauczyciel", "m1", "nauczyciel", "nauczyciela", "nauczyciela", "teacher"),
    ("lekarz", "m1", "lekarz", "lekarza", "lekarza", "doctor"),
    ("dziewczyna", "f", "dziewczyna", "dziewczynę", "dziewczyny", "girl"),
    ("kobieta", "f", "kobieta", "kobietę", "kobiety", "woman"),
    ("matka", "f", "matka", "matkę", "matki", "mother"),
    ("książka", "f", "książka", "książkę", "książki", "book"),
    ("gazeta", "f", "gazeta", "gazetę", "gazety", "newspaper"),
    ("list", "m3", "list", "list", "listu", "letter"),
    ("samochód", "m3", "samochód", "samochód", "samochodu", "car"),
    ("dom", "m3", "dom", "dom", "domu", "house"),
    ("jabłko", "n", "jabłko", "jabłko", "jabłka", "apple"),
]
ANIMATE = [n for n in NOUNS if n[1] in ("m1", "m2") or n[0] in ("dziewczyna", "kobieta", "matka")]

# stem (nominative masculine = stem + "y"), english
ADJECTIVES = [("duż", "big"), ("mał", "small"), ("star", "old"), ("now", "new"),
              ("dobr", "good"), ("czerwon", "red")]
ADJ_ENDINGS = {
    ("m1", "nom"): "y", ("m1", "acc"): "ego", ("m1", "gen"): "ego",
    ("m2", "nom"): "y", ("m2", "acc"): "ego", ("m2", "gen"): "ego",
    ("m3", "nom"): "y", ("m3", "acc"): "y", ("m3", "gen"): "ego",
    ("f", "nom"): "a", ("f", "acc"): "ą", ("f", "gen"): "ej",
    ("n", "nom"): "e", ("n", "acc"): "e", ("n", "gen"): "ego",
}

# lemma, present 3sg, past stem, english 3sg, english past, english base
VERBS = [
    ("widzieć", "widzi", "widział", "sees", "saw", "see"),
    ("lubić", "lubi", "lubił", "likes", "liked", "like"),
    ("mieć", "ma", "miał", "has", "had", "have"),
    ("kupować", "kupuje", "kupował", "buys", "bought", "buy"),
    ("czytać", "czyta", "czytał", "reads", "read", "read"),
    ("szukać", "szuka", "szukał", "looks for", "looked for", "look for"),
    ("odwiedzać", "odwiedza", "odwiedzał", "visits", "visited", "visit"),
]

ORDERS = [("S", "V", "O")] * 10 + [("O", "V", "S")] * 3 + [("S", "O", "V")] * 3 + \
         [("V", "S", "O")] * 2 + [("O", "S", "V")] * 2


def _adj_form(stem: str, gender: str, case: str) -> str:
    ending = ADJ_ENDINGS[(gender, case)]
    # soft stems: duż- takes -y/-e but the spelling stays regular here
    return stem + ending


def _noun_phrase(rng, pool, case):
    noun = rng.choice(pool)
    lemma, gender = noun[0], noun[1]
    form = {"nom": noun[2], "acc": noun[3], "gen": noun[4]}[case]
    toks = []
    en = ["the"]
    if rng.random() < 0.4:
        stem, adj_en = rng.choice(ADJECTIVES)
        toks.append((_adj_form(stem, gender, case), stem + "y", f"adj:sg:{case}:{gender}:pos"))
        en.append(adj_en)
    alt = [c for c, f in (("nom", noun[2]), ("acc", noun[3]), ("gen", noun[4])) if f == form and c != case]
    toks.append((form, lemma, f"subst:sg:{case}:{gender}", [f"subst:sg:{c}:{gender}" for c in alt]))
    en.append(noun[5])
    return toks, en, gender


def _sentence(rng):
    subj, subj_en, gender = _noun_phrase(rng, ANIMATE, "nom")
    negated = rng.random() < 0.2
    obj, obj_en, _ = _noun_phrase(rng, NOUNS, "gen" if negated else "acc")
    lemma, pres, past, en3, en_past, en_base = rng.choice(VERBS)
    past_tense = rng.random() < 0.5
    verb = []
    if negated:
        verb.append(("nie", "nie", "qub"))
    if past_tense:
        form = past + ("a" if gender == "f" else "")
        verb.append((form, lemma, f"praet:sg:{'f' if gender == 'f' else 'm1'}:imperf"))
        verb_en = (["did", "not", en_base] if negated else [en_past])
    else:
        verb.append((pres, lemma, "fin:sg:ter:imperf"))
        verb_en = (["does", "not", en_base] if negated else [en3])
    verb_en = " ".join(verb_en).split()
    parts = {"S": subj, "V": verb, "O": obj}
    toks = []
    lead_en = []
    if rng.random() < 0.15:
        toks.append(("dziś", "dziś", "adv"))
        lead_en = ["today"]
    for role in rng.choice(ORDERS):
        toks.extend(parts[role])
    toks.append((".", ".", "interp"))
    en = lead_en + subj_en + verb_en + obj_en + ["."]
    return toks, en


def _capitalize(words):
    return [words[0][:1].upper() + words[0][1:]] + list(words[1:]) if words else words


def _tok_xml(tok) -> str:
    orth, base, ctag = tok[0], tok[1], tok[2]
    lexes = [f'<lex disamb="1"><base>{escape(base)}</base><ctag>{ctag}</ctag></lex>']
    for other in (tok[3] if len(tok) > 3 else []):
        lexes.append(f"<lex><base>{escape(base)}</base><ctag>{other}</ctag></lex>")
    return f"<tok><orth>{escape(orth)}</orth>{''.join(lexes)}</tok>"


def generate(n: int = N_PAIRS, seed: int = SEED):
    """Return ``(polish_lines, english_lines, xml_text)``; XML has one
    ``<sentence>`` per Polish line, closed by an end-of-line marker token."""
    rng = random.Random(seed)
    pl_lines, en_lines, xml_sents = [], [], []
    prev = None
    while len(pl_lines) < n:
        roll = rng.random()
        if prev is not None and roll < 0.02:
            toks, en = prev
        elif roll < 0.04:
            toks, en = [], []
            for _ in range(3):
                t, e = _sentence(rng)
                toks += t
                en += e
        else:
            toks, en = _sentence(rng)
        prev = (toks, en)
        if rng.random() < 0.02:
            toks = toks[:-1] + [("★", "★", "ign")] + toks[-1:]
        words = _capitalize([t[0] for t in toks])
        toks = [(w,) + tuple(t[1:]) for w, t in zip(words, toks)]
        pl = " ".join(words)
        en_text = " ".join(_capitalize(en))
        if rng.random() < 0.03:
            pl = f"<b>{pl}</b>"
            en_text = f"<b>{en_text}</b>"
        pl_lines.append(pl.replace(" .", "."))
        en_lines.append(en_text.replace(" .", "."))
        marker = (MARKER, MARKER, "ign")
        xml_sents.append("<sentence>\n" + "\n".join(_tok_xml(t) for t in toks + [marker]) + "\n</sentence>")
    return pl_lines, en_lines, _wrap_xml(xml_sents)


def _wrap_xml(sentences) -> str:
    return ('<?xml version="1.0" encoding="UTF-8"?>\n'
            '<!DOCTYPE cesAna SYSTEM "xcesAnaIPI.dtd">\n'
            '<cesAna version="1.0" type="lex disamb">\n<chunkList>\n<chunk type="p">\n'
            + "\n".join(sentences) + "\n</chunk>\n</chunkList>\n</cesAna>\n")


def generate_lm_extra(n: int = N_LM_EXTRA, seed: int = SEED + 1) -> list[str]:
    """Extra English-like monolingual sentences for language-model training."""
    rng = random.Random(seed)
    return [" ".join(_capitalize(_sentence(rng)[1])).replace(" .", ".") for _ in range(n)]


def bundle_files(n: int = N_PAIRS, seed: int = SEED) -> dict[str, str]:
    pl, en, xml = generate(n, seed)
    sample_pl, _, sample_xml = generate(SAMPLE_LINES, seed)
    return {
        "toy.pl": "".join(line + "\n" for line in pl),
        "toy.en": "".join(line + "\n" for line in en),
        "toy.pl.xml": xml,
        "sample.xml": sample_xml,
        "lm_extra.en": "".join(line + "\n" for line in generate_lm_extra()),
    }


def write_bundle(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in bundle_files().items():
        path = directory / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


def data_dir() -> Path:
    return Path(__file__).with_name("data")
