"""Config-driven experiment pipeline and report tables."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

from . import align, corpus, decoder, lm, morpho, phrase, toydata, tuning
from .metrics import bleu, meteor_corpus, nist, ter_corpus

STAGES = ("tokenize", "factorize", "clean", "lowercase", "split", "final_clean", "train_lm",
          "align", "symmetrize", "extract_phrases", "score_phrases", "train_reordering",
          "tune", "decode", "evaluate")
VARIANTS = ("original", "cleaned", "inf", "svo", "inf+svo")
METRICS = ("bleu", "nist", "meteor", "ter")
REPORT_COLUMNS = ("experiment", "training", "lang_model", "tuning", "test", "BLEU", "NIST", "METEOR", "TER")
BUNDLED = "bundled:"


class ConfigError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class ExperimentConfig:
    id: str
    src: str
    tgt: str
    direction: str = "pl-en"
    variant: str = "cleaned"
    annotations: str = ""
    lm_sources: list[str] = field(default_factory=list)
    lm_order: int = 5
    dev_size: int = 100
    test_size: int = 100
    seed: int = 0
    max_len: int = 80
    len_unit: str = "characters"
    lowercase: bool = True
    strip_markup: bool = True
    drop_repetitions: bool = True
    drop_nonlanguage_symbols: bool = True
    align_iterations: int = 5
    heuristic: str = "grow-diag-final-and"
    max_phrase_len: int = 7
    beam_size: int = 100
    distortion_limit: int = 6
    ttable_limit: int = 20
    nbest: int = 100
    tune_rounds: int = 3
    use_lm: bool = True
    metrics: list[str] = field(default_factory=lambda: list(METRICS))
    out_dir: str = "runs"
    training_label: str = ""
    lm_label: str = ""
    tuning_label: str = "dev split"
    test_label: str = "test split"

    @property
    def src_lang(self) -> str:
        return self.direction.split("-")[0]

    @property
    def tgt_lang(self) -> str:
        return self.direction.split("-")[1]


def _convert(name: str, typ, raw: str):
    typ = str(typ)
    if typ.startswith("int"):
        return int(raw)
    if typ.startswith("bool"):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if typ.startswith("list"):
        return [x.strip() for x in raw.split(",") if x.strip()]
    return raw


def resolve_path(value: str, base: Path) -> Path:
    if value.startswith(BUNDLED):
        return toydata.data_dir() / value[len(BUNDLED):]
    path = Path(value)
    return path if path.is_absolute() else base / path


def parse_config(text: str, base: Path = Path(".")) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name: f for f in fields(ExperimentConfig)}
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"[config] line {n}: expected key = value")
        key, raw = (x.strip() for x in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"[config] line {n}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"[config] line {n}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, known[key].type, raw)
        except ValueError as exc:
            raise ConfigError(f"[config] line {n}: {key}: {exc}") from None
    for key in ("id", "src", "tgt"):
        if key not in values:
            raise ConfigError(f"[config] missing required key {key!r}")
    cfg = ExperimentConfig(**values)
    validate(cfg, base)
    return cfg


def validate(cfg: ExperimentConfig, base: Path = Path(".")) -> None:
    if cfg.variant not in VARIANTS:
        raise ConfigError(f"[config] variant must be one of {VARIANTS}")
    if cfg.direction.count("-") != 1:
        raise ConfigError("[config] direction must look like src-tgt")
    bad = [m for m in cfg.metrics if m not in METRICS]
    if bad:
        raise ConfigError(f"[config] unknown metrics {bad}")
    if cfg.variant in ("inf", "svo", "inf+svo") and not cfg.annotations:
        raise ConfigError(f"[config] variant {cfg.variant} needs annotations")
    heuristics = [h.value for h in align.SymmetrizationHeuristic]
    if cfg.heuristic not in heuristics:
        raise ConfigError(f"[config] heuristic must be one of {heuristics}")
    if cfg.len_unit not in ("characters", "chars", "tokens"):
        raise ConfigError("[config] len_unit must be characters or tokens")
    for key in ("max_len", "lm_order", "dev_size", "test_size", "max_phrase_len", "beam_size", "nbest",
                "align_iterations", "ttable_limit"):
        if getattr(cfg, key) < 1:
            raise ConfigError(f"[config] {key} must be >= 1")
    for key in ("distortion_limit", "tune_rounds"):
        if getattr(cfg, key) < 0:
            raise ConfigError(f"[config] {key} must be >= 0")
    paths = {"src": cfg.src, "tgt": cfg.tgt}
    if cfg.annotations:
        paths["annotations"] = cfg.annotations
    for k, p in enumerate(cfg.lm_sources):
        paths[f"lm_sources[{k}]"] = p
    for key, value in paths.items():
        if not resolve_path(value, base).is_file():
            raise ConfigError(f"[config] {key}: missing file {value}")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"[config] cannot read {path}: {exc}") from None
    cfg = parse_config(text, path.parent)
    cfg._base = path.parent
    return cfg


def dumps_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, list):
            value = ",".join(value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


@dataclass
class ReportRow:
    experiment: str
    training: str
    lang_model: str
    tuning: str
    test: str
    bleu: float | None = None
    nist: float | None = None
    meteor: float | None = None
    ter: float | None = None

    def cells(self) -> list[str]:
        def fmt(v, scale):
            return "-" if v is None else f"{v * scale:.2f}"
        return [self.experiment, self.training, self.lang_model, self.tuning, self.test,
                fmt(self.bleu, 100), fmt(self.nist, 1), fmt(self.meteor, 100), fmt(self.ter, 100)]


def render_report(rows: Sequence[ReportRow]) -> tuple[str, str]:
    """Plain-text table and tab-separated file; BLEU, METEOR and TER are
    scaled by 100, NIST is not, all with two decimals."""
    if not rows:
        raise ValueError("no report rows")
    table = [list(REPORT_COLUMNS)] + [r.cells() for r in rows]
    widths = [max(len(row[c]) for row in table) for c in range(len(REPORT_COLUMNS))]
    lines = ["TER: lower is better"]
    for row in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in rows:
        writer.writerow(r.cells())
    return "\n".join(lines) + "\n", buf.getvalue()


def parse_report(tsv: str) -> list[ReportRow]:
    rows = []
    reader = csv.reader(io.StringIO(tsv), delimiter="\t")
    header = next(reader)
    if tuple(header) != REPORT_COLUMNS:
        raise ValueError("unexpected report header")
    for cells in reader:
        if not cells:
            continue
        nums = [None if c == "-" else float(c) for c in cells[5:]]
        scaled = [None if v is None else v / s for v, s in zip(nums, (100, 1, 100, 100))]
        rows.append(ReportRow(*cells[:5], *scaled))
    return rows


class _Run:
    def __init__(self, cfg: ExperimentConfig, run_dir: Path, log_stream=None):
        self.cfg = cfg
        self.dir = run_dir
        self.log_lines: list[str] = []
        self.stream = log_stream

    def log(self, text: str):
        self.log_lines.append(text)
        if self.stream is not None:
            print(text, file=self.stream)

    def write(self, name: str, text: str) -> Path:
        path = self.dir / name
        path.write_text(text, encoding="utf-8")
        return path


def _lines(pairs, side):
    return "".join(" ".join(getattr(p, side)) + "\n" for p in pairs)


def run_experiment(cfg: ExperimentConfig, base: Path | None = None, out_dir: Path | None = None,
                   log_stream=None) -> ReportRow:
    """Run every stage and write artifacts under ``out_dir/<id>``.

    Stage failures are raised as ``StageError`` naming the stage.
    """
    base = Path(base if base is not None else getattr(cfg, "_base", "."))
    validate(cfg, base)
    run_dir = Path(out_dir if out_dir is not None else resolve_path(cfg.out_dir, base)) / cfg.id
    run_dir.mkdir(parents=True, exist_ok=True)
    run = _Run(cfg, run_dir, log_stream)
    state: dict = {}
    for stage in STAGES:
        run.log(f"stage {stage}")
        try:
            globals()["_stage_" + stage](run, state, base)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc
    run.write("stages.log", "".join(line + "\n" for line in run.log_lines))
    return state["row"]


def _stage_tokenize(run, st, base):
    cfg = run.cfg
    src = resolve_path(cfg.src, base).read_text(encoding="utf-8").splitlines()
    tgt = resolve_path(cfg.tgt, base).read_text(encoding="utf-8").splitlines()
    if len(src) != len(tgt):
        raise corpus.LineCountMismatch(len(src), len(tgt))
    st["corpus"] = corpus.ParallelCorpus.from_lines(src, tgt, cfg.src_lang, cfg.tgt_lang)
    run.log(f"  {len(st['corpus'].pairs)} pairs")


def _stage_factorize(run, st, base):
    cfg = run.cfg
    if cfg.variant not in ("inf", "svo", "inf+svo"):
        run.log("  skipped")
        return
    xml = resolve_path(cfg.annotations, base).read_text(encoding="utf-8")
    sentences = morpho.split_on_markers(morpho.parse_annotations(xml))
    pairs = st["corpus"].pairs
    if len(sentences) != len(pairs):
        raise corpus.LineCountMismatch(len(sentences), len(pairs))
    lines = morpho.make_variant(sentences, cfg.variant, marker=False)
    st["corpus"] = st["corpus"].with_pairs(
        [corpus.SentencePair(tuple(line.split()), p.tgt_tokens, p.origin_line) for line, p in zip(lines, pairs)])
    run.write("variant." + cfg.src_lang, "".join(line + "\n" for line in lines))


def _cleaning_config(cfg, lowercase=False):
    return corpus.CleaningConfig(max_len=cfg.max_len, len_unit=cfg.len_unit, strip_markup=cfg.strip_markup,
                                 drop_repetitions=cfg.drop_repetitions,
                                 drop_nonlanguage_symbols=cfg.drop_nonlanguage_symbols, lowercase=lowercase)


def _stage_clean(run, st, base):
    if run.cfg.variant == "original":
        run.log("  skipped")
        return
    st["corpus"], log = corpus.clean(st["corpus"], _cleaning_config(run.cfg))
    run.write("clean.log", log.dump())
    run.log(f"  kept {len(st['corpus'].pairs)} pairs")


def _stage_lowercase(run, st, base):
    if not run.cfg.lowercase:
        run.log("  skipped")
        return
    st["corpus"] = corpus.lowercase(st["corpus"])


def _stage_split(run, st, base):
    cfg = run.cfg
    train, dev, test = corpus.split_random(st["corpus"], cfg.dev_size, cfg.test_size, seed=cfg.seed)
    st.update(train=train, dev=dev, test=test)
    for name, part in (("train", train), ("dev", dev), ("test", test)):
        run.write(f"{name}.{cfg.src_lang}", _lines(part.pairs, "src_tokens"))
        run.write(f"{name}.{cfg.tgt_lang}", _lines(part.pairs, "tgt_tokens"))
    run.log(f"  train {len(train.pairs)} dev {len(dev.pairs)} test {len(test.pairs)}")


def _stage_final_clean(run, st, base):
    if run.cfg.variant == "original":
        run.log("  skipped")
        return
    st["train"], log = corpus.clean(st["train"], _cleaning_config(run.cfg))
    run.write("final_clean.log", log.dump())
    run.log(f"  train {len(st['train'].pairs)} pairs")


def _stage_train_lm(run, st, base):
    cfg = run.cfg
    sents = [list(p.tgt_tokens) for p in st["train"].pairs]
    for source in cfg.lm_sources:
        for line in resolve_path(source, base).read_text(encoding="utf-8").splitlines():
            toks = corpus.tokenize(line.lower() if cfg.lowercase else line)
            if toks:
                sents.append(toks)
    st["lm"] = lm.train_kn(sents, order=cfg.lm_order)
    run.write("lm.arpa", lm.dumps_arpa(st["lm"]))
    run.log(f"  {len(sents)} sentences, order {cfg.lm_order}")


def _stage_align(run, st, base):
    cfg = run.cfg
    pairs = st["train"].pairs
    fwd_t = align.train_ibm1(pairs, cfg.align_iterations)
    bwd_t = align.train_ibm1(pairs, cfg.align_iterations, reverse=True)
    fwd = [align.viterbi_align(fwd_t, p.src_tokens, p.tgt_tokens) for p in pairs]
    bwd = [align.viterbi_align(bwd_t, p.tgt_tokens, p.src_tokens).transpose() for p in pairs]
    align.write_alignments(fwd, run.dir / "aligned.fwd")
    align.write_alignments(bwd, run.dir / "aligned.bwd")
    st.update(fwd=fwd, bwd=bwd)
    run.log(f"  loglik {fwd_t.loglik[0]:.4f} -> {fwd_t.loglik[-1]:.4f}")


def _stage_symmetrize(run, st, base):
    st["alignments"] = [align.symmetrize(f, b, run.cfg.heuristic) for f, b in zip(st["fwd"], st["bwd"])]
    align.write_alignments(st["alignments"], run.dir / "aligned.sym")


def _stage_extract_phrases(run, st, base):
    extracted = []
    for pair, a in zip(st["train"].pairs, st["alignments"]):
        extracted.extend(phrase.extract_with_orientations(pair, a, run.cfg.max_phrase_len))
    st["extracted"] = extracted
    run.log(f"  {len(extracted)} phrase pairs")


def _stage_score_phrases(run, st, base):
    lex = phrase.lexical_tables(st["train"].pairs, st["alignments"])
    st["phrase_table"] = phrase.score_table((e[0] for e in st["extracted"]), lex)
    run.write("phrase-table", st["phrase_table"].dumps())


def _stage_train_reordering(run, st, base):
    st["reordering"] = phrase.train_reordering(st["extracted"])
    run.write("reordering-table", st["reordering"].dumps())


def _decode_args(cfg):
    return {"beam_size": cfg.beam_size, "distortion_limit": cfg.distortion_limit,
            "ttable_limit": cfg.ttable_limit}


def _stage_tune(run, st, base):
    cfg = run.cfg
    lm_model = st["lm"] if cfg.use_lm else None
    st["models"] = decoder.Models(st["phrase_table"], st["reordering"], lm_model)
    init = decoder.FeatureWeights()
    if not cfg.use_lm:
        init.lm = 0.0
    dev = st["dev"].pairs
    weights = tuning.tune_weights([list(p.src_tokens) for p in dev], [[list(p.tgt_tokens)] for p in dev],
                                  st["models"], init, rounds=cfg.tune_rounds, seed=cfg.seed,
                                  nbest=cfg.nbest, decode_args=_decode_args(cfg), log=run.log)
    st["weights"] = weights
    run.write("weights", weights.dumps())


def _stage_decode(run, st, base):
    outputs = []
    for p in st["test"].pairs:
        result = decoder.decode(list(p.src_tokens), st["models"], st["weights"], **_decode_args(run.cfg))
        outputs.append(result.translation)
    st["outputs"] = outputs
    run.write("test.hyp", "".join(" ".join(o) + "\n" for o in outputs))


def evaluate(outputs, references, names=METRICS) -> dict[str, float]:
    scores = {}
    if "bleu" in names:
        scores["bleu"] = bleu(outputs, references).score
    if "nist" in names:
        scores["nist"] = nist(outputs, references).score
    if "meteor" in names:
        scores["meteor"] = meteor_corpus(outputs, references).score
    if "ter" in names:
        scores["ter"] = ter_corpus(outputs, references).score
    return scores


def _stage_evaluate(run, st, base):
    cfg = run.cfg
    refs = [[list(p.tgt_tokens)] for p in st["test"].pairs]
    scores = evaluate(st["outputs"], refs, cfg.metrics)
    row = ReportRow(cfg.id, cfg.training_label or cfg.variant,
                    cfg.lm_label or ("none" if not cfg.use_lm else "train" + (" + extra" if cfg.lm_sources else "")),
                    cfg.tuning_label, cfg.test_label, **scores)
    text, tsv = render_report([row])
    run.write("report", tsv)
    run.write("report.txt", text)
    run.write("scores.json", json.dumps(scores, sort_keys=True) + "\n")
    st["row"] = row


def run_batch(config_dir, out_dir: Path | None = None, log_stream=None) -> list[ReportRow]:
    """Run every ``*.cfg`` in a directory in name order; ids must be unique."""
    paths = sorted(Path(config_dir).glob("*.cfg"))
    if not paths:
        raise ConfigError(f"[config] no .cfg files in {config_dir}")
    configs = [load_config(p) for p in paths]
    ids = [c.id for c in configs]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ConfigError(f"[config] duplicate experiment ids {dupes}")
    return [run_experiment(c, out_dir=out_dir, log_stream=log_stream) for c in configs]
