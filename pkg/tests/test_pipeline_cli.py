import io
import json
import math

import pytest

from pedloops import (
    StructureError,
    check_loops,
    parse_pedigree,
    run_pipeline,
    serialize_pedigree,
)
from pedloops.cli import EXIT_INTERNAL, EXIT_INVALID, EXIT_LOOPS, EXIT_OK, main
from pedloops.model import same_structure
from pedloops.pipeline import classification_label

TWO_LOOP_FAMILIES = """ID,MotherID,FatherID,Sex,isProband
1,,,M,0
2,,,F,0
3,2,1,M,0
4,2,1,F,0
5,4,3,F,1
11,,,M,0
12,,,F,0
13,12,11,M,0
14,12,11,F,0
15,14,13,M,1
"""


def test_pipeline_drops_probandless_family(load):
    result = run_pipeline(load("twofam"))
    assert result.info["families_total"] == 2
    assert result.info["families_kept"] == 1
    assert result.info["dropped_ids"] == [11, 12, 13, 14, 15]
    assert sorted(result.merged.ids) == [1, 2, 3]


def test_pipeline_repairs_and_breaks(load, read_text):
    result = run_pipeline(load("t17"))
    assert result.info["placeholder_ids"] == [7]
    assert serialize_pedigree(result.merged) == read_text("t17_expected")
    assert not check_loops(result.families[0].pedigree)


def test_pipeline_threads_clone_ids_across_families():
    result = run_pipeline(parse_pedigree(TWO_LOOP_FAMILIES))
    assert result.info["families_kept"] == 2
    clones = [(r.clone_id, r.original_id) for fam in result.families
              for r in fam.records]
    assert clones == [(16, 4), (17, 14)]
    merged = result.merged
    assert merged.by_id(5).mother_id == 16
    assert merged.by_id(15).mother_id == 17
    assert merged.by_id(16).clone_of == 4
    assert merged.by_id(17).clone_of == 14


def test_classification_labels(load):
    def label(name):
        return run_pipeline(load(name), apply_breaks=False).families[0] \
            .analysis.classification

    assert label("double_loop") == "multiple_matings"
    assert label("tested_breaker") == "no_multiple_matings"
    assert label("t15") == "mixed"
    assert label("loopfree") == "acyclic"
    assert classification_label(["mst", "greedy"]) == "mixed"


def test_analysis_carries_candidates_and_plan(load):
    analysis = run_pipeline(load("double_loop"), apply_breaks=False) \
        .families[0].analysis
    assert analysis.loops == 2
    assert analysis.trim_persons == 4 and analysis.trim_matings == 4
    assert analysis.trim_edges == 9
    by_person = {c.person_id: c for c in analysis.candidates}
    assert set(by_person) == {3, 4, 7, 8}
    assert math.isclose(by_person[4].cost, math.log(2) / 3)
    assert [(s.breaker_id, s.mating_id) for s in analysis.planned_steps] == \
        [(4, 2), (4, 3)]
    assert math.isclose(analysis.plan_total, 2 * math.log(2))


def test_uniform_weight_override(load):
    result = run_pipeline(load("tested_breaker"),
                          weight_fn=lambda fam: {i.id: math.log(2) for i in fam})
    assert [(r.original_id, r.mating_id) for fam in result.families
            for r in fam.records] == [(9, 5)]


# ---------------------------------------------------------------------------
# command line

def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_cli_check_reports_loops(data_dir, capsys):
    code = main(["check", str(data_dir / "double_loop.csv")])
    out = capsys.readouterr().out
    assert code == EXIT_LOOPS
    assert "family 1: 2 loop(s)" in out
    assert "total: 2 loop(s)" in out


def test_cli_check_clean_exit(data_dir, capsys):
    assert main(["check", str(data_dir / "loopfree.csv")]) == EXIT_OK
    assert "0 loop(s)" in capsys.readouterr().out


def test_cli_break_writes_expected_table(data_dir, tmp_path, capsys):
    out_file = tmp_path / "out.csv"
    code = main(["break", str(data_dir / "double_loop.csv"), "-o", str(out_file)])
    assert code == EXIT_OK
    assert out_file.read_text(encoding="utf-8") == \
        (data_dir / "double_loop_expected.csv").read_text(encoding="utf-8")
    report = capsys.readouterr().out
    assert "duplicate 4 in mating 2 as 10" in report
    assert "factor 4" in report


def test_cli_break_to_stdout_keeps_report_on_stderr(data_dir, capsys):
    code = main(["break", str(data_dir / "t06.csv")])
    captured = capsys.readouterr()
    assert code == EXIT_OK
    assert captured.out.startswith("ID,MotherID,FatherID")
    assert "duplicate" in captured.err


@pytest.mark.parametrize("name", ["double_loop", "t12", "t15", "t17"])
def test_cli_break_output_passes_check(name, data_dir, tmp_path, capsys):
    out_file = tmp_path / "broken.csv"
    assert main(["break", str(data_dir / f"{name}.csv"),
                 "-o", str(out_file)]) == EXIT_OK
    capsys.readouterr()
    assert main(["check", str(out_file)]) == EXIT_OK
    assert "total: 0 loop(s)" in capsys.readouterr().out


def test_cli_break_round_trips_loop_free_input(data_dir, tmp_path):
    src = data_dir / "loopfree.csv"
    out_file = tmp_path / "same.csv"
    assert main(["break", str(src), "-o", str(out_file)]) == EXIT_OK
    assert out_file.read_text(encoding="utf-8") == src.read_text(encoding="utf-8")


def test_cli_break_tsv_output(data_dir, tmp_path):
    out_file = tmp_path / "out.tsv"
    main(["break", str(data_dir / "double_loop.csv"), "-o", str(out_file),
          "--format", "tsv"])
    text = out_file.read_text(encoding="utf-8")
    assert "\t" in text.splitlines()[0]
    reparsed = parse_pedigree(text)
    expected = parse_pedigree(
        (data_dir / "double_loop_expected.csv").read_text(encoding="utf-8"))
    assert same_structure(reparsed, expected)


def test_cli_break_json_report(data_dir, tmp_path, capsys):
    main(["break", str(data_dir / "double_loop.csv"), "-o", str(tmp_path / "x.csv"),
          "--report", "json"])
    payload = json.loads(capsys.readouterr().out)
    fam = payload["families"][0]
    assert fam["loops"] == 2
    assert fam["break"]["clones_created"] == 2
    assert [s["breaker"] for s in fam["break"]["steps"]] == [4, 4]
    assert fam["break"]["complexity"]["factor"] == 4


def test_cli_break_renders_figures(data_dir, tmp_path):
    fig_dir = tmp_path / "figs"
    out_file = tmp_path / "out.csv"
    code = main(["break", str(data_dir / "double_loop.csv"), "-o", str(out_file),
                 "--figures", str(fig_dir)])
    assert code == EXIT_OK
    graph_png = fig_dir / "family1_graph.png"
    trimmed_png = fig_dir / "family1_trimmed.png"
    assert graph_png.is_file() and graph_png.stat().st_size > 1000
    assert trimmed_png.is_file() and trimmed_png.stat().st_size > 1000
    assert graph_png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_cli_report_json(data_dir, capsys):
    code = main(["report", str(data_dir / "tested_breaker.csv"), "--report", "json"])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    fam = payload["families"][0]
    assert fam["classification"] == "no_multiple_matings"
    assert fam["planned_steps"] == [{"breaker": 8, "mating": 5, "method": "mst"}]
    cheap = [c for c in fam["candidates"] if c["person"] == 8]
    assert cheap and cheap[0]["cost"] == 0.0


def test_cli_report_text_and_graphs(data_dir, tmp_path, capsys):
    tgf_dir = tmp_path / "tgf"
    code = main(["report", str(data_dir / "double_loop.csv"), "--graphs", str(tgf_dir)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "loops: 2" in out
    assert "candidate 4:" in out
    full = (tgf_dir / "family1.tgf").read_text(encoding="utf-8")
    trimmed = (tgf_dir / "family1_trimmed.tgf").read_text(encoding="utf-8")
    assert "#" in full and "p9 m4 child_link" in full
    assert "p9" not in trimmed  # proband is outside the loop region


def test_cli_variant_selection(data_dir, tmp_path, capsys):
    out_file = tmp_path / "out.csv"
    code = main(["break", str(data_dir / "tested_breaker.csv"), "-o", str(out_file),
                 "--variants", "V1"])
    assert code == EXIT_OK
    assert out_file.read_text(encoding="utf-8") == \
        (data_dir / "tested_breaker_expected.csv").read_text(encoding="utf-8")
    assert main(["break", str(data_dir / "tested_breaker.csv"), "-o", str(out_file),
                 "--variants", "V404"]) == EXIT_INVALID


def test_cli_uniform_genotypes_changes_selection(data_dir, tmp_path, capsys):
    main(["break", str(data_dir / "tested_breaker.csv"), "-o", str(tmp_path / "x.csv"),
          "--uniform-genotypes", "2", "--report", "json"])
    payload = json.loads(capsys.readouterr().out)
    assert [s["breaker"] for s in payload["families"][0]["break"]["steps"]] == [9]


def test_cli_uniform_genotypes_rejects_zero(data_dir, capsys):
    assert main(["check", str(data_dir / "double_loop.csv"),
                 "--uniform-genotypes", "0"]) == EXIT_INVALID
    assert "at least 1" in capsys.readouterr().err


def test_cli_invalid_inputs(tmp_path, capsys):
    bad = _write(tmp_path, "bad.csv", "ID,Sex\n1,M\n")
    assert main(["check", bad]) == EXIT_INVALID
    assert main(["check", str(tmp_path / "nope.csv")]) == EXIT_INVALID
    probandless = _write(tmp_path, "np.csv",
                         "ID,MotherID,FatherID,Sex,isProband\n1,,,M,0\n")
    assert main(["check", probandless]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert "proband" in err


def test_cli_internal_errors_exit_three(data_dir, monkeypatch, capsys):
    import pedloops.cli as cli

    def boom(*args, **kwargs):
        raise StructureError("wrecked invariant")

    monkeypatch.setattr(cli, "run_pipeline", boom)
    assert main(["check", str(data_dir / "double_loop.csv")]) == EXIT_INTERNAL
    assert "internal error" in capsys.readouterr().err


def test_cli_reads_stdin(data_dir, monkeypatch, capsys):
    text = (data_dir / "double_loop.csv").read_text(encoding="utf-8")
    monkeypatch.setattr("sys.stdin", io.StringIO(text))
    assert main(["check", "-"]) == EXIT_LOOPS


def test_cli_explicit_delimiter(data_dir, tmp_path):
    tabbed = (data_dir / "double_loop.csv").read_text(encoding="utf-8").replace(",", "\t")
    src = _write(tmp_path, "double_loop.tsv", tabbed)
    assert main(["check", src, "--delimiter", "tab"]) == EXIT_LOOPS
