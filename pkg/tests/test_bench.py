import csv
import io

from monoprune.bench import COLUMNS, bundled_names, load_suite, resolve_problem, run_bench, to_csv
from monoprune.gen import bundled_sources
from monoprune.search import Mode


def test_bench_csv_shape():
    rows = run_bench([("bitvec_toy", resolve_problem("bitvec_toy")), ("unrealizable", resolve_problem("unrealizable"))],
                     [Mode.OFF, Mode.GFA], max_candidates=2000)
    table = list(csv.reader(io.StringIO(to_csv(rows))))
    assert tuple(table[0]) == COLUMNS
    assert [(r[0], r[1]) for r in table[1:]] == [
        ("bitvec_toy", "off"), ("bitvec_toy", "gfa"), ("unrealizable", "off"), ("unrealizable", "gfa")]
    toy_off, toy_gfa, un_off, un_gfa = table[1:]
    assert toy_off[5] == toy_gfa[5] == "true" and toy_off[6] == toy_gfa[6]
    assert un_off[5] == "false" and un_off[6] == ""
    assert int(un_gfa[2]) == 1
    float(toy_off[7])


def test_suite_loading(tmp_path):
    assert [name for name, _ in load_suite("bundled")] == bundled_names()
    for name in ("gi_plus", "imp_swap"):
        (tmp_path / f"{name}.problem").write_text(bundled_sources()[name], encoding="utf-8")
    assert [name for name, _ in load_suite(str(tmp_path))] == ["gi_plus", "imp_swap"]
    assert [name for name, _ in load_suite("imp_loop")] == ["imp_loop"]
