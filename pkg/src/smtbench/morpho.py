"""Morphosyntactic tagger output (``tok``/``orth``/``lex``/``base``/``ctag`` XML)
and the derived Polish corpus variants: base forms, SVO order, or both."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, Sequence

MARKER = "_EOL_"

INF, SVO, INF_SVO = "inf", "svo", "inf+svo"
VARIANTS = (INF, SVO, INF_SVO)

# NKJP-style verb classes; "verb" accepted for coarse tagsets.
VERB_CLASSES = frozenset({"fin", "praet", "inf", "impt", "imps", "bedzie", "winien",
                          "pred", "aglt", "verb"})
NOUN_CLASSES = frozenset({"subst", "depr", "ppron12", "ppron3", "siebie", "noun"})
ADJ_CLASSES = frozenset({"adj", "adja", "adjp", "adjc", "num", "pact", "ppas"})
CLAUSE_BREAKS = frozenset({",", ";", ":"})
CASES = frozenset({"nom", "gen", "dat", "acc", "inst", "loc", "voc"})
OBJECT_CASES = frozenset({"acc", "gen"})


class MorphoError(Exception):
    pass


class MalformedXml(MorphoError):
    def __init__(self, position, message=""):
        super().__init__(f"malformed XML at {position}: {message}")
        self.position = position


class MissingField(MorphoError):
    def __init__(self, tok_index: int, field: str):
        super().__init__(f"token {tok_index}: missing <{field}>")
        self.tok_index = tok_index
        self.field = field


class UnmappableChar(MorphoError):
    def __init__(self, offset: int, codepoint: int):
        super().__init__(f"character U+{codepoint:04X} at offset {offset} has no mapping")
        self.offset = offset
        self.codepoint = codepoint


@dataclass(frozen=True)
class CTag:
    word_class: str
    attributes: tuple[str, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "CTag":
        parts = text.strip().split(":")
        if not parts[0]:
            raise ValueError(f"empty grammatical class in ctag {text!r}")
        return cls(parts[0], tuple(parts[1:]))

    def __str__(self):
        return ":".join((self.word_class,) + self.attributes)

    @property
    def cases(self) -> frozenset:
        # attribute values may hold dotted alternatives, e.g. "nom.acc"
        return frozenset(v for a in self.attributes for v in a.split(".") if v in CASES)


@dataclass(frozen=True)
class Analysis:
    base: str
    ctag: CTag
    disamb: bool = False


@dataclass(frozen=True)
class AnnotatedToken:
    orth: str
    analyses: tuple[Analysis, ...]

    def __post_init__(self):
        object.__setattr__(self, "analyses", tuple(self.analyses))
        if not self.analyses:
            raise ValueError(f"token {self.orth!r} has no analyses")

    @property
    def disamb_count(self) -> int:
        return sum(a.disamb for a in self.analyses)

    @property
    def chosen(self) -> Analysis:
        for a in self.analyses:
            if a.disamb:
                return a
        return self.analyses[0]

    @property
    def ctag(self) -> CTag:
        return self.chosen.ctag


@dataclass(frozen=True)
class AnnotatedSentence:
    tokens: tuple[AnnotatedToken, ...]
    end_marker: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    @property
    def orths(self) -> list[str]:
        return [t.orth for t in self.tokens]


def _parse_tok(elem, index: int) -> AnnotatedToken:
    orth = elem.find("orth")
    if orth is None:
        raise MissingField(index, "orth")
    lexes = elem.findall("lex")
    if not lexes:
        raise MissingField(index, "lex")
    analyses = []
    for lex in lexes:
        base = lex.find("base")
        if base is None:
            raise MissingField(index, "base")
        ctag = lex.find("ctag")
        if ctag is None or not (ctag.text or "").strip():
            raise MissingField(index, "ctag")
        analyses.append(Analysis((base.text or "").strip(), CTag.parse(ctag.text),
                                 lex.get("disamb", "0").strip() == "1"))
    return AnnotatedToken((orth.text or "").strip(), analyses)


_PROLOG_RE = re.compile(r"<\?xml[^>]*\?>|<!DOCTYPE[^>]*>", re.IGNORECASE)


def _parse_root(text: str):
    body = _PROLOG_RE.sub("", text)
    try:
        return ET.fromstring(f"<root>{body}</root>")
    except ET.ParseError as exc:
        line, col = exc.position
        raise MalformedXml((line, col), str(exc)) from None


def parse_annotations(xml) -> list[AnnotatedSentence]:
    """Parse tagger XML into sentences.

    ``xml`` is a string or a readable text stream. Sentence boundaries come
    from ``<sentence>`` elements; documents without them are split on
    blank lines between ``<tok>`` elements.
    """
    text = xml if isinstance(xml, str) else xml.read()
    if not text.strip():
        return []
    root = _parse_root(text)
    sentences = []
    index = 0
    sentence_elems = list(root.iter("sentence"))
    if sentence_elems:
        groups = [s.iter("tok") for s in sentence_elems]
    else:
        try:
            groups = [_parse_root(block).iter("tok")
                      for block in re.split(r"\n[ \t]*\n", _PROLOG_RE.sub("", text)) if "<tok" in block]
        except MalformedXml:
            # blank lines inside a wrapper element: treat the document as one sentence
            groups = [root.iter("tok")]
    for toks in groups:
        parsed = []
        for elem in toks:
            parsed.append(_parse_tok(elem, index))
            index += 1
        if parsed:
            sentences.append(AnnotatedSentence(parsed))
    return sentences


def split_on_markers(sentences: Iterable[AnnotatedSentence], marker: str = MARKER) -> list[AnnotatedSentence]:
    """Regroup a token stream into input lines using marker tokens.

    The tagger re-segments text into its own sentences; markers placed at
    the end of every input line restore the original line boundaries. The
    marker itself is dropped and recorded as ``end_marker``.
    """
    lines = []
    current: list[AnnotatedToken] = []
    for sent in sentences:
        for tok in sent.tokens:
            if tok.orth == marker:
                lines.append(AnnotatedSentence(current, end_marker=True))
                current = []
            else:
                current.append(tok)
    if current:
        lines.append(AnnotatedSentence(current))
    return lines


def select_stem(tok: AnnotatedToken) -> str:
    """Base of the first disambiguated analysis, else of the first analysis."""
    return tok.chosen.base


def is_verb(tok: AnnotatedToken) -> bool:
    return tok.ctag.word_class in VERB_CLASSES


def _role(tok: AnnotatedToken):
    tag = tok.ctag
    if tag.word_class in VERB_CLASSES:
        return "V"
    if tag.word_class in NOUN_CLASSES:
        if "nom" in tag.cases:
            return "S"
        if tag.cases & OBJECT_CASES:
            return "O"
    return None


def _nominal_case(role: str) -> frozenset:
    return frozenset({"nom"}) if role == "S" else OBJECT_CASES


def _clause_buckets(tokens: Sequence[AnnotatedToken]) -> list[int]:
    """Bucket index per token: 0 subject, 1 verb, 2 object, 3 trailing."""
    roles = [_role(t) for t in tokens]
    # grow nominal chunks over adjacent adjectives agreeing in case
    for i, role in enumerate(list(roles)):
        if role not in ("S", "O"):
            continue
        cases = tokens[i].ctag.cases & _nominal_case(role)
        for step in (-1, 1):
            j = i + step
            while 0 <= j < len(tokens) and roles[j] is None \
                    and tokens[j].ctag.word_class in ADJ_CLASSES and tokens[j].ctag.cases & cases:
                roles[j] = role
                j += step
    order = {"S": 0, "V": 1, "O": 2}
    buckets = [0] * len(tokens)
    following = 3
    for i in range(len(tokens) - 1, -1, -1):
        if roles[i] is not None:
            following = order[roles[i]]
        buckets[i] = following
    return buckets


def svo_order(tokens: Sequence[AnnotatedToken]) -> list[AnnotatedToken]:
    """Reorder each clause to subject, verb, object.

    Clauses end at ``,;:``. Unclassified tokens move with the next classified
    token; clauses without a verb are left untouched.
    """
    out: list[AnnotatedToken] = []
    clause: list[AnnotatedToken] = []

    def flush():
        if any(is_verb(t) for t in clause):
            buckets = _clause_buckets(clause)
            out.extend(t for _, _, t in sorted(zip(buckets, range(len(clause)), clause),
                                               key=lambda x: (x[0], x[1])))
        else:
            out.extend(clause)
        clause.clear()

    for tok in tokens:
        clause.append(tok)
        if tok.orth in CLAUSE_BREAKS:
            flush()
    flush()
    return out


def variant_tokens(sentence: AnnotatedSentence, kind: str, verbs_only: bool = False) -> list[str]:
    if kind not in VARIANTS:
        raise ValueError(f"unknown variant {kind!r}")
    toks = list(sentence.tokens)
    if kind in (SVO, INF_SVO):
        toks = svo_order(toks)
    if kind in (INF, INF_SVO):
        return [select_stem(t) if (not verbs_only or is_verb(t)) else t.orth for t in toks]
    return [t.orth for t in toks]


def make_variant(sentences: Iterable[AnnotatedSentence], kind: str, marker: bool = True,
                 verbs_only: bool = False) -> list[str]:
    """One output line per sentence; marker appended when the sentence had one."""
    lines = []
    for sent in sentences:
        words = variant_tokens(sent, kind, verbs_only)
        if marker and sent.end_marker:
            words.append(MARKER)
        lines.append(" ".join(words))
    return lines


CP1250_TO_UTF8 = "cp1250->utf8"
UTF8_TO_CP1250 = "utf8->cp1250"


def convert_encoding(data: bytes, direction: str) -> bytes:
    """Convert between Windows-1250 and UTF-8.

    Bytes undefined in Windows-1250 (e.g. 0x81) are reported as
    ``UnmappableChar`` with the byte value as codepoint.
    """
    if direction == CP1250_TO_UTF8:
        try:
            return data.decode("cp1250").encode("utf-8")
        except UnicodeDecodeError as exc:
            raise UnmappableChar(exc.start, data[exc.start]) from None
    if direction == UTF8_TO_CP1250:
        text = data.decode("utf-8")
        try:
            return text.encode("cp1250")
        except UnicodeEncodeError as exc:
            raise UnmappableChar(exc.start, ord(text[exc.start])) from None
    raise ValueError(f"unknown direction {direction!r}")
