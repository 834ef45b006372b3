import json
import math

import pytest

from crowdtree import AssignmentStrategy, assign_proposed, sweep_error
from crowdtree.errors import ParseError, TableMismatch, UnknownTest, ValidationError
from crowdtree.fileio import (
    allocation_from_doc,
    allocation_to_doc,
    error_sweep_csv,
    load_allocation,
    load_table,
    load_tree,
    parse_table_text,
    save_allocation,
    save_tree,
    simulation_report_csv,
    table_checksum,
    table_to_text,
    tree_from_doc,
    tree_to_doc,
    worker_sweep_csv,
)
from crowdtree.fixtures import DEMO_TABLE_CSV, demo_table, designed_tree
from crowdtree.simulate import simulate, sweep_workers


def test_parse_demo_csv_matches_fixture():
    parsed = parse_table_text(DEMO_TABLE_CSV, error_prob=0.05)
    fixture = demo_table(0.05)
    assert parsed.classes == fixture.classes
    assert parsed.tests == fixture.tests
    assert parsed.priors == fixture.priors
    assert (parsed.outcomes == fixture.outcomes).all()
    assert table_checksum(parsed) == table_checksum(fixture)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as err:
        parse_table_text("class,a,b\nT1,0,1\nT2,1,0\n")
    assert "line 2" in str(err.value)
    with pytest.raises(ParseError) as err:
        parse_table_text("class,a,b\nprior,0.5,0.5\nT1,0,2\n")
    assert "line 3" in str(err.value)
    with pytest.raises(ParseError) as err:
        parse_table_text("class,a,b\nprior,0.5\nT1,0,1\n")
    assert "line 2" in str(err.value)
    with pytest.raises(ParseError):
        parse_table_text("")


def test_parse_crlf_tolerated():
    parsed = parse_table_text(DEMO_TABLE_CSV.replace("\n", "\r\n"), error_prob=0.05)
    assert parsed.classes == demo_table().classes


def test_error_matrix_parsing():
    matrix = (
        "class,c1,c2,c3,c4,c5\n"
        "T1,0.01,0.01,0.01,0.01,0.01\n"
        "T2,0.02,0.02,0.02,0.02,0.02\n"
        "T3,0.03,0.03,0.03,0.03,0.03\n"
        "T4,0.04,0.04,0.04,0.04,0.04\n"
        "T5,0.05,0.05,0.05,0.44,0.05\n"
    )
    table = parse_table_text(DEMO_TABLE_CSV, error_matrix_text=matrix)
    assert table.error("T2", "c3") == 0.02
    assert math.isnan(table.error("T5", "c4"))  # undefined cell ignores the file value
    with pytest.raises(ParseError):
        parse_table_text(DEMO_TABLE_CSV, error_matrix_text="class,a\nT1,0.1\n")
    missing = "class,c1,c2,c3,c4,c5\nT1,0.01,0.01,0.01,0.01,0.01\n"
    with pytest.raises(ParseError):
        parse_table_text(DEMO_TABLE_CSV, error_matrix_text=missing)
    with pytest.raises(ValidationError):
        parse_table_text(DEMO_TABLE_CSV, error_prob=0.05, error_matrix_text=matrix)


def test_table_text_roundtrip():
    table = demo_table(0.05)
    again = parse_table_text(table_to_text(table), error_prob=0.05)
    assert table_checksum(again) == table_checksum(table)


def test_checksum_ignores_error_probs():
    assert table_checksum(demo_table(0.05)) == table_checksum(demo_table(0.3))


def test_tree_document_roundtrip():
    table = demo_table(0.05)
    tree = designed_tree()
    doc = tree_to_doc(tree, table, {"kind": "greedy", "metric": "additive"})
    assert tree_from_doc(doc, table) == tree
    assert doc["root"]["test"] == "T1"
    assert doc["root"]["1"] == {"leaf": "c4"}
    text = json.dumps(doc)
    assert tree_from_doc(json.loads(text), table) == tree


def test_tree_document_checksum_mismatch():
    table = demo_table(0.05)
    doc = tree_to_doc(designed_tree(), table)
    other = parse_table_text(
        DEMO_TABLE_CSV.replace("0.2,0.05,0.1,0.6,0.05", "0.6,0.05,0.1,0.2,0.05"),
        error_prob=0.05,
    )
    with pytest.raises(TableMismatch):
        tree_from_doc(doc, other)
    # explicit opt-out skips the check but still validates structure
    assert tree_from_doc(doc, other, check_checksum=False)


def test_tree_document_unknown_test():
    table = demo_table(0.05)
    doc = tree_to_doc(designed_tree(), table)
    doc["root"]["test"] = "T9"
    with pytest.raises(UnknownTest):
        tree_from_doc(doc, table)


def test_tree_document_bad_nodes():
    table = demo_table(0.05)
    doc = tree_to_doc(designed_tree(), table)
    doc["root"] = {"leaf": "c1", "extra": 1}
    with pytest.raises(ParseError):
        tree_from_doc(doc, table)
    with pytest.raises(ParseError):
        tree_from_doc({"format": "nope", "root": {}}, table)


def test_tree_file_roundtrip(tmp_path):
    table = demo_table(0.05)
    path = tmp_path / "tree.json"
    save_tree(str(path), designed_tree(), table, {"kind": "manual"})
    assert load_tree(str(path), table) == designed_tree()


def test_allocation_roundtrip(tmp_path):
    table = demo_table(0.05)
    alloc, _ = assign_proposed(designed_tree(), table, 5, 0.2)
    doc = allocation_to_doc(alloc)
    assert doc["budget"] == 5
    again = allocation_from_doc(doc)
    assert again.extra_pairs == dict(alloc.extra_pairs)
    assert again.worker_error == alloc.worker_error
    assert again.strategy is AssignmentStrategy.PROPOSED
    path = tmp_path / "alloc.json"
    save_allocation(str(path), alloc)
    assert load_allocation(str(path)).extra_pairs == dict(alloc.extra_pairs)
    with pytest.raises(ParseError):
        allocation_from_doc({"format": "nope"})


def test_load_table(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text(DEMO_TABLE_CSV, encoding="utf-8")
    table = load_table(str(path), error_prob=0.1)
    assert table.error("T1", "c1") == 0.1


def test_report_csv_deterministic():
    table = demo_table(0.05)
    points = sweep_error(table, [0.05, 0.1], n_random_trees=5, seed=0)
    header = {"seed": 0, "grid": "0.05:0.1:0.05"}
    assert error_sweep_csv(points, header) == error_sweep_csv(points, header)
    text = error_sweep_csv(points, header)
    assert text.startswith("# seed=0\n")
    assert "error_prob,designed_pm,random_mean_pm,random_std_pm" in text

    wpoints = sweep_workers(
        designed_tree(), table, [0, 1], [AssignmentStrategy.PROPOSED], 0.2
    )
    wtext = worker_sweep_csv(wpoints, {"seed": 0})
    assert "budget,strategy,pm" in wtext
    assert "0,proposed," in wtext

    report = simulate(designed_tree(), table, trials=1000, seed=0)
    rtext = simulation_report_csv(report, table)
    assert rtext == simulation_report_csv(report, table)
    assert "p_hat," in rtext and "# seed=0" in rtext
