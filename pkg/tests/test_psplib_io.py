import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rcpsp_2pga.evolution import Individual, RunResult
from rcpsp_2pga.psplib_io import (
    DuplicateKeyError,
    InstanceId,
    PSPLIBParseError,
    data_path,
    deserialize_result,
    load_best_known,
    parse_best_known,
    parse_instance,
    render_best_known,
    render_instance,
    serialize_result,
    shipped_instances,
)
from rcpsp_2pga.scheduling import InfeasibleInstanceError, InstanceError, ProjectInstance, Schedule

from .conftest import make_t1

TINY = """\
************************************************************************
jobs (incl. supersource/sink ):  5
RESOURCES
  - renewable                 :  1   R
************************************************************************
PRECEDENCE RELATIONS:
jobnr.    #modes  #successors   successors
   1        1          2           2   3
   2        1          1           4
   3        1          1           5
   4        1          1           5
   5        1          0
************************************************************************
REQUESTS/DURATIONS:
jobnr. mode duration  R 1
------------------------------------------------------------------------
  1      1     0       0
  2      1     2       1
  3      1     3       1
  4      1     2       {r}
  5      1     0       0
************************************************************************
RESOURCEAVAILABILITIES:
  R 1
    {cap}
************************************************************************
"""


def test_parse_tiny_file():
    inst = parse_instance(TINY.format(r=2, cap=2))
    assert inst == ProjectInstance(
        durations=(0, 2, 3, 2, 0),
        predecessors=inst.predecessors,
        capacities=(2,),
        requirements=((0,), (1,), (1,), (2,), (0,)),
    )
    assert inst.predecessors == make_t1().predecessors


def test_requirement_above_capacity_is_infeasible():
    with pytest.raises(InfeasibleInstanceError, match="R1"):
        parse_instance(TINY.format(r=5, cap=4))


def test_missing_section_names_it():
    text = TINY.format(r=2, cap=2).replace("REQUESTS/DURATIONS", "REQUESTS")
    with pytest.raises(PSPLIBParseError, match="REQUESTS/DURATIONS"):
        parse_instance(text)


def test_bad_field_reports_section_and_line():
    text = TINY.format(r=2, cap=2).replace("  2      1     2       1", "  2      1     x       1")
    with pytest.raises(PSPLIBParseError) as info:
        parse_instance(text)
    assert info.value.section == "REQUESTS/DURATIONS"
    assert info.value.line == 18


def test_job_count_mismatch():
    text = TINY.format(r=2, cap=2).replace(":  5", ":  6", 1)
    with pytest.raises(InstanceError, match="header declares 6"):
        parse_instance(text)


def test_empty_project_file():
    inst = parse_instance(render_instance(ProjectInstance.from_real_activities([], [], [3])))
    assert inst.n_real == 0 and inst.n_activities == 2


def test_render_round_trip():
    t1 = make_t1()
    again = parse_instance(render_instance(t1), name="T1")
    assert again == t1


def test_j120_header():
    path = shipped_instances("j120")[0]
    assert path.name == "j1201_1.sm"
    inst = parse_instance(path.read_text(), name=path.stem)
    assert inst.n_real == 120
    assert inst.n_activities == 122
    assert inst.n_resources == 4
    assert inst.capacities == (14, 12, 13, 9)


def test_shipped_files_parse_consistently(all_shipped):
    assert len(all_shipped) == 30
    for inst in all_shipped:
        assert sum(len(s) for s in inst.successors) == sum(len(p) for p in inst.predecessors)
        assert inst.durations[0] == inst.durations[inst.sink] == 0
        assert not any(inst.requirements[0]) and not any(inst.requirements[inst.sink])


def test_successor_lists_match_file():
    text = shipped_instances("j30")[0].read_text()
    inst = parse_instance(text)
    lines = text.splitlines()
    start = lines.index("PRECEDENCE RELATIONS:") + 2
    listed = 0
    for line in lines[start : start + 32]:
        row = [int(x) for x in line.split()]
        listed += row[2]
        assert inst.successors[row[0] - 1] == {s - 1 for s in row[3:]}
    assert listed == sum(len(p) for p in inst.predecessors)


def test_instance_id_from_name():
    ident = InstanceId.from_name("data/j1206_9.sm")
    assert ident == InstanceId("j120", 6, 9)
    assert ident.flat == 59
    assert InstanceId.from_name("j301_10").flat == 10
    assert InstanceId.from_name("j6048_10").flat == 480
    assert InstanceId.from_name("T1") is None


# --- best-known tables ------------------------------------------------------


def test_best_known_rows():
    assert parse_best_known("59 125\n") == {59: 125}
    assert parse_best_known("133\t85") == {133: 85}
    assert parse_best_known("") == {}


def test_best_known_psplib_layout():
    text = "Par  Inst  Makespan  CPU-Time\n-----\n 6  9   125   1.2\n14  3  85  0.0\n"
    assert parse_best_known(text) == {59: 125, 133: 85}
    assert parse_best_known("j1206_9 125") == {59: 125}


def test_best_known_errors():
    with pytest.raises(PSPLIBParseError, match="not an integer"):
        parse_best_known("59 12.5")
    with pytest.raises(DuplicateKeyError):
        parse_best_known("59 125\n59 126\n")
    with pytest.raises(DuplicateKeyError):
        parse_best_known("59 125\n6 9 125\n")
    with pytest.raises(PSPLIBParseError, match="positive"):
        parse_best_known("59 0")


def test_two_phase_table_round_trips():
    table = load_best_known(data_path("j120_2pga_best.txt"))
    assert len(table) == 90
    assert table[59] == 125
    assert table[72] == 97
    assert table[133] == 85
    assert table[584] == 131
    assert parse_best_known(render_best_known(table)) == table


@given(st.dictionaries(st.integers(1, 10_000), st.integers(1, 10_000)))
def test_render_parse_identity(table):
    assert parse_best_known(render_best_known(table)) == table


# --- results ----------------------------------------------------------------


def _result(trace_len=3):
    return RunResult(
        instance_id="T1",
        seed=7,
        best=Individual((0, 1, 2, 3, 4), 5),
        best_schedule=Schedule((0, 0, 0, 3, 5), (0, 2, 3, 5, 5)),
        generations_run=trace_len,
        schedules_evaluated=412,
        fitness_trace=[7, 5, 5][:trace_len],
    )


def test_serialize_contains_makespan():
    text = serialize_result(_result())
    assert '"makespan": 5' in text
    assert '"activity_list": [0, 1, 2, 3, 4]' in text


def test_serialize_round_trip():
    r = _result()
    assert deserialize_result(serialize_result(r)) == r


def test_trace_length_preserved():
    assert len(json.loads(serialize_result(_result(2)))["fitness_trace"]) == 2
