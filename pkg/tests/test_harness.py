import io

import pytest

from smtbench import harness, toydata
from smtbench.harness import (STAGES, ConfigError, ExperimentConfig, ReportRow, StageError, dumps_config,
                              evaluate, load_config, parse_config, parse_report, render_report,
                              run_batch, run_experiment)

SMALL = """\
src = toy.pl
tgt = toy.en
lm_order = 3
dev_size = 10
test_size = 10
max_phrase_len = 3
beam_size = 10
ttable_limit = 5
nbest = 10
tune_rounds = 1
seed = 3
"""


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    pl, en, xml = toydata.generate(120, seed=5)
    (d / "toy.pl").write_text("".join(x + "\n" for x in pl), encoding="utf-8")
    (d / "toy.en").write_text("".join(x + "\n" for x in en), encoding="utf-8")
    (d / "toy.pl.xml").write_text(xml, encoding="utf-8")
    (d / "extra.en").write_text("The cat sees the dog.\nThe dog sees the cat.\n", encoding="utf-8")
    return d


def write_cfg(directory, name, text):
    path = directory / f"{name}.cfg"
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------- config

def test_parse_config_defaults(corpus_dir):
    cfg = parse_config("id = a\nsrc = toy.pl  # comment\ntgt = toy.en\n", corpus_dir)
    assert cfg.variant == "cleaned" and cfg.lm_order == 5 and cfg.beam_size == 100
    assert cfg.metrics == ["bleu", "nist", "meteor", "ter"]
    assert (cfg.src_lang, cfg.tgt_lang) == ("pl", "en")


def test_parse_config_types(corpus_dir):
    cfg = parse_config(f"id = a\n{SMALL}use_lm = no\nlm_sources = extra.en, toy.en\nmetrics = bleu,ter\n",
                       corpus_dir)
    assert cfg.use_lm is False and cfg.dev_size == 10
    assert cfg.lm_sources == ["extra.en", "toy.en"] and cfg.metrics == ["bleu", "ter"]


@pytest.mark.parametrize("text, fragment", [
    ("id = a\nsrc = toy.pl\ntgt = toy.en\ncolour = red\n", "unknown key"),
    ("id = a\nid = b\nsrc = toy.pl\ntgt = toy.en\n", "duplicate key"),
    ("src = toy.pl\ntgt = toy.en\n", "missing required key 'id'"),
    ("id = a\nsrc = toy.pl\ntgt = toy.en\nuse_lm = maybe\n", "use_lm"),
    ("id = a\nsrc = toy.pl\ntgt = toy.en\nbeam_size = many\n", "beam_size"),
    ("id = a\nsrc = toy.pl\ntgt = toy.en\nbeam_size = 0\n", "beam_size must be >= 1"),
    ("id = a\nsrc = nope.pl\ntgt = toy.en\n", "missing file nope.pl"),
    ("id = a\nsrc = toy.pl\ntgt = toy.en\nvariant = inf\n", "needs annotations"),
    ("id = a\nsrc = toy.pl\ntgt = toy.en\nvariant = best\n", "variant must be one of"),
    ("id = a\nsrc = toy.pl\ntgt = toy.en\nmetrics = bleu,rouge\n", "unknown metrics"),
    ("id = a\nsrc toy.pl\n", "expected key = value"),
    ("id = a\nsrc = toy.pl\ntgt = toy.en\nheuristic = grow\n", "heuristic must be one of"),
    ("id = a\nsrc = toy.pl\ntgt = toy.en\nlen_unit = bytes\n", "len_unit"),
    ("id = a\nsrc = toy.pl\ntgt = toy.en\ntune_rounds = -1\n", "tune_rounds must be >= 0"),
])
def test_config_errors(corpus_dir, text, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text, corpus_dir)
    assert str(info.value).startswith("[config]")
    assert fragment in str(info.value)


def test_bundled_paths_and_roundtrip(tmp_path):
    cfg = parse_config("id = b\nsrc = bundled:toy.pl\ntgt = bundled:toy.en\nseed = 9\n")
    assert harness.resolve_path(cfg.src, tmp_path) == toydata.data_dir() / "toy.pl"
    again = parse_config(dumps_config(cfg))
    assert again == cfg


def test_load_config_uses_file_directory(corpus_dir, tmp_path):
    path = write_cfg(corpus_dir, "rel", "id = rel\nsrc = toy.pl\ntgt = toy.en\n")
    assert load_config(path).id == "rel"
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


# ---------------------------------------------------------------- reports

def test_report_roundtrip():
    rows = [ReportRow("0", "cleaned", "train", "dev split", "test split", 0.1583, 4.5, 0.5, 0.7),
            ReportRow("1", "inf", "none", "dev split", "test split", bleu=0.2, ter=0.61)]
    text, tsv = render_report(rows)
    assert text.splitlines()[0] == "TER: lower is better"
    assert tsv.splitlines()[0].split("\t") == list(harness.REPORT_COLUMNS)
    assert tsv.splitlines()[1].split("\t")[5:] == ["15.83", "4.50", "50.00", "70.00"]
    assert tsv.splitlines()[2].split("\t")[5:] == ["20.00", "-", "-", "61.00"]
    back = parse_report(tsv)
    assert back[0].bleu == pytest.approx(0.1583) and back[1].nist is None
    assert render_report(back) == (text, tsv)


def test_report_errors():
    with pytest.raises(ValueError):
        render_report([])
    with pytest.raises(ValueError):
        parse_report("a\tb\n")


def test_evaluate_selects_metrics():
    scores = evaluate([["a", "b"]], [[["a", "b"]]], ["bleu", "ter"])
    assert scores == {"bleu": 1.0, "ter": 0.0}


# ---------------------------------------------------------------- pipeline

def test_run_writes_every_artifact(corpus_dir, tmp_path):
    cfg = parse_config(f"id = full\n{SMALL}lm_sources = extra.en\n", corpus_dir)
    log = io.StringIO()
    row = run_experiment(cfg, corpus_dir, tmp_path, log_stream=log)
    run_dir = tmp_path / "full"
    for name in ("clean.log", "train.pl", "train.en", "dev.pl", "dev.en", "test.pl", "test.en",
                 "final_clean.log", "lm.arpa", "aligned.fwd", "aligned.bwd", "aligned.sym",
                 "phrase-table", "reordering-table", "weights", "test.hyp", "report", "report.txt",
                 "scores.json", "stages.log"):
        assert (run_dir / name).is_file(), name
    stages = [line.split()[1] for line in (run_dir / "stages.log").read_text().splitlines()
              if line.startswith("stage ")]
    assert stages == list(STAGES)
    assert "stage tokenize" in log.getvalue()
    assert row.lang_model == "train + extra"
    assert 0 <= row.bleu <= 1 and row.ter >= 0
    assert len((run_dir / "test.hyp").read_text().splitlines()) == 10
    assert parse_report((run_dir / "report").read_text())[0].bleu == pytest.approx(row.bleu, abs=5e-5)


def test_run_is_reproducible(corpus_dir, tmp_path):
    cfg = parse_config(f"id = rep\n{SMALL}", corpus_dir)
    run_experiment(cfg, corpus_dir, tmp_path / "a")
    run_experiment(cfg, corpus_dir, tmp_path / "b")
    for name in ("report", "weights", "test.hyp", "phrase-table", "lm.arpa"):
        assert (tmp_path / "a/rep" / name).read_bytes() == (tmp_path / "b/rep" / name).read_bytes()


def test_original_variant_skips_cleaning(corpus_dir, tmp_path):
    cfg = parse_config(f"id = orig\n{SMALL}variant = original\nuse_lm = false\n", corpus_dir)
    row = run_experiment(cfg, corpus_dir, tmp_path)
    assert not (tmp_path / "orig/clean.log").exists()
    train = (tmp_path / "orig/train.pl").read_text(encoding="utf-8")
    assert "<b>" in train or "★" in train
    assert row.lang_model == "none"


def test_inf_variant_uses_lemmas(corpus_dir, tmp_path):
    cfg = parse_config(f"id = inf\n{SMALL}variant = inf\nannotations = toy.pl.xml\n", corpus_dir)
    run_experiment(cfg, corpus_dir, tmp_path)
    variant = (tmp_path / "inf/variant.pl").read_text(encoding="utf-8").split()
    assert "kot" in variant and "kota" not in variant


def test_stage_error_names_the_stage(corpus_dir, tmp_path):
    cfg = parse_config(f"id = big\n{SMALL}".replace("dev_size = 10", "dev_size = 500"), corpus_dir)
    with pytest.raises(StageError) as info:
        run_experiment(cfg, corpus_dir, tmp_path)
    assert info.value.stage == "split"
    assert str(info.value).startswith("[split]")


def test_batch(corpus_dir, tmp_path):
    cfgs = tmp_path / "cfgs"
    cfgs.mkdir()
    body = SMALL.replace("toy.", f"{corpus_dir}/toy.").replace("tune_rounds = 1", "tune_rounds = 0")
    body += "use_lm = false\n"
    write_cfg(cfgs, "b", "id = second\n" + body)
    write_cfg(cfgs, "a", "id = first\n" + body)
    rows = run_batch(cfgs, out_dir=tmp_path / "out")
    assert [r.experiment for r in rows] == ["first", "second"]
    write_cfg(cfgs, "c", "id = first\n" + body)
    with pytest.raises(ConfigError, match="duplicate"):
        run_batch(cfgs, out_dir=tmp_path / "out")
    with pytest.raises(ConfigError):
        run_batch(tmp_path / "out")
