import random
from datetime import datetime, timedelta, timezone
from decimal import Decimal

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from generators import T0, ocel_log
from procmine.errors import EmptyLogError, RowError, SchemaError
from procmine.eventlog import FlatEvent, FlatLog, discover_dfg, flatten_ocel, parse_flat_csv, write_flat_csv
from procmine.ocel import OCEvent, OCELog, OCObject, OCObjectType

HEADER = "Case ID,Activity,Start,Complete,Owner,Amount,Auto\n"
COLUMNS = {"case_id": "Case ID", "activity": "Activity", "start_ts": "Start", "end_ts": "Complete",
           "resource": "Owner", "cost": "Amount", "automated": "Auto"}

SALES_CSV = HEADER + "\n".join([
    "203011,Create Order Line,2023-05-02T08:00:00,2023-05-02T08:05:00,anna,1.50,false",
    "203011,Set Header Block,2023-05-02T08:10:00,,system,,true",
    "203011,Remove Header Block,2023-05-03T09:00:00,2023-05-03T09:01:00,system,0.10,true",
    "203011,Create Delivery,2023-05-04T10:00:00,,bob,,",
    "203011,Goods Issue,2023-05-05T11:00:00,,bob,2.00,false",
    "203011,Create Invoice,2023-05-06T12:00:00,,carla,,false",
    "203012,Create Order Line,2023-05-02T09:00:00,,anna,1.50,false",
    "203012,Create Delivery,2023-05-03T09:00:00,,bob,,",
    "203012,Goods Issue,2023-05-04T09:00:00,,bob,,",
    "203013,Create Order Line,2023-05-02T10:00:00,,anna,,",
    "203013,Create Invoice,2023-05-07T10:00:00,,carla,,",
]) + "\n"


def test_eleven_row_sales_log():
    log = parse_flat_csv(SALES_CSV.encode(), COLUMNS, "sales")
    assert len(log) == 11
    trace = [e.activity for e in log.cases()["203011"]]
    assert "Create Order Line" in trace and "Remove Header Block" in trace
    first = log.events[0]
    assert first.duration == timedelta(minutes=5)
    assert first.cost == Decimal("1.50") and first.automated is False and first.resource == "anna"


def test_header_only_is_empty_log():
    with pytest.raises(EmptyLogError, match="empty log"):
        parse_flat_csv(HEADER.encode(), COLUMNS)


def test_missing_mandatory_column_names_the_role():
    with pytest.raises(SchemaError, match="start_ts"):
        parse_flat_csv(b"case_id,activity\nc1,A\n")


@pytest.mark.parametrize("row,fragment", [
    ("c1,A,not-a-time,,,,", "unparseable timestamp"),
    ("c1,A,2024-01-02T00:00:00,2024-01-01T00:00:00,,,", "end_ts precedes"),
    (",A,2024-01-01T00:00:00,,,,", "non-empty"),
    ("c1,A,2024-01-01T00:00:00,,,-3,", "non-negative"),
    ("c1,A,2024-01-01T00:00:00,,,abc,", "cost"),
    ("c1,A,2024-01-01T00:00:00,,,,maybe", "boolean"),
])
def test_row_errors_carry_row_number(row, fragment):
    text = HEADER + "c0,A,2024-01-01T00:00:00,,,,\n" + row + "\n"
    with pytest.raises(RowError, match=fragment) as info:
        parse_flat_csv(text.encode(), COLUMNS)
    assert info.value.row_number == 2


def test_unmapped_columns_become_attributes():
    log = parse_flat_csv(b"case_id,activity,start_ts,plant\nc1,A,2024-01-01T00:00:00,P100\n")
    assert log.events[0].attributes == {"plant": "P100"}


def _random_log(rng: random.Random, n: int) -> FlatLog:
    events = []
    for i in range(n):
        start = T0 + timedelta(seconds=rng.randint(0, 10 ** 7), milliseconds=rng.randint(0, 999))
        end = start + timedelta(seconds=rng.randint(0, 5000)) if rng.random() < 0.5 else None
        events.append(FlatEvent(
            case_id=f"c{rng.randint(1, 60)}", activity=rng.choice("ABCDEFG"), start_ts=start, end_ts=end,
            resource=rng.choice([None, "anna", "bob, jr.", 'quote "q"']),
            cost=rng.choice([None, Decimal("0"), Decimal(f"{rng.randint(0, 99999)}.{rng.randint(0, 99):02d}")]),
            automated=rng.choice([None, True, False]),
            attributes={"note": "x,y"} if rng.random() < 0.2 else {},
        ))
    return FlatLog(tuple(events), "random")


def test_thousand_row_round_trip():
    log = _random_log(random.Random(7), 1000)
    again = parse_flat_csv(write_flat_csv(log), source_name="random")
    assert len(again) == 1000
    assert again == log


@given(st.randoms(use_true_random=False), st.integers(1, 60))
@settings(max_examples=60, deadline=None)
def test_round_trip_property(rng, n):
    log = _random_log(rng, n)
    assert parse_flat_csv(write_flat_csv(log), source_name="random") == log


def _log(*traces) -> FlatLog:
    events = []
    for c, trace in enumerate(traces):
        events.extend(FlatEvent(f"c{c}", a, T0 + timedelta(minutes=i)) for i, a in enumerate(trace))
    return FlatLog(tuple(events))


def test_dfg_single_trace():
    dfg = discover_dfg(_log("ABC"))
    assert dfg.activity_nodes == {"A": 1, "B": 1, "C": 1}
    assert {k: v.frequency for k, v in dfg.edges.items()} == {("A", "B"): 1, ("B", "C"): 1}
    assert dfg.case_count == 1


def test_dfg_is_additive_over_cases():
    dfg = discover_dfg(_log("AB", "AB"))
    assert dfg.edges[("A", "B")].frequency == 2


def test_dfg_wait_times_use_end_and_clamp():
    t = datetime(2024, 1, 1, tzinfo=timezone.utc)
    log = FlatLog((FlatEvent("c", "A", t, t + timedelta(hours=1)), FlatEvent("c", "B", t + timedelta(hours=3)),
                   FlatEvent("d", "A", t, t + timedelta(hours=5)), FlatEvent("d", "B", t + timedelta(hours=3))))
    assert sorted(discover_dfg(log).edges[("A", "B")].durations) == [timedelta(0), timedelta(hours=2)]


def test_dfg_empty_log():
    with pytest.raises(EmptyLogError):
        discover_dfg(FlatLog(()))


@given(st.randoms(use_true_random=False))
@settings(max_examples=50, deadline=None)
def test_dfg_matches_pairwise_oracle(rng):
    traces = ["".join(rng.choice("ABCD") for _ in range(rng.randint(1, 8))) for _ in range(50)]
    events = []
    for c, trace in enumerate(traces):
        # equal timestamps are common; order falls back to input position
        events.extend(FlatEvent(f"c{c}", a, T0 + timedelta(minutes=rng.randint(0, 5))) for a in trace)
    rng.shuffle(events)
    dfg = discover_dfg(FlatLog(tuple(events)))
    nodes, edges = oracles.dfg_counts(events)
    assert dfg.activity_nodes == dict(nodes)
    assert {k: v.frequency for k, v in dfg.edges.items()} == dict(edges)
    assert dfg.edge_total() == len(events) - dfg.case_count


# -- flattening --------------------------------------------------------------


def _ocel(types, objects, events):
    return OCELog.build([OCObjectType(t) for t in types], [OCObject(o, t) for o, t in objects],
                        [OCEvent(f"e{i}", a, T0 + timedelta(hours=h), tuple((o, None) for o in objs))
                         for i, (a, h, objs) in enumerate(events)])


def test_payment_shared_by_three_invoices_is_duplicated():
    log = _ocel(["Invoice", "Payment"], [("i1", "Invoice"), ("i2", "Invoice"), ("i3", "Invoice"), ("p", "Payment")],
                [("Payment", 1, ["p", "i1", "i2", "i3"])])
    flat, report = flatten_ocel(log, "Invoice")
    assert len(flat) == 3
    assert report.duplicated_event_count == 2
    assert report.per_activity_inflation == {"Payment": (3, 1)}


def test_one_target_per_event_gives_zero_report():
    log = _ocel(["Order"], [("o1", "Order"), ("o2", "Order")],
                [("Create", 0, ["o1"]), ("Ship", 1, ["o1"]), ("Create", 2, ["o2"])])
    flat, report = flatten_ocel(log, "Order")
    assert len(flat) == len(log.events)
    assert (report.duplicated_event_count, report.false_rework_edge_count, report.dropped_event_count) == (0, 0, 0)


def test_interleaved_pickups_create_false_rework():
    log = _ocel(["PO", "Pickup", "Delivery"],
                [("po", "PO"), ("k1", "Pickup"), ("k2", "Pickup"), ("d1", "Delivery"), ("d2", "Delivery")],
                [("Pickup", 1, ["po", "k1"]), ("Pickup", 2, ["po", "k2"]),
                 ("Deliver", 3, ["po", "d1"]), ("Deliver", 4, ["po", "d2"])])
    flat, report = flatten_ocel(log, "PO")
    # every flattened a->a step here joins two different sub-objects; none is real rework
    pairs = [(a.activity, b.activity) for a, b in zip(flat.cases()["po"], flat.cases()["po"][1:])]
    assert pairs.count(("Pickup", "Pickup")) == 1 and pairs.count(("Deliver", "Deliver")) == 1
    assert report.false_rework_edge_count == 2
    assert report.false_rework_edges == {("Pickup", "Pickup"): 1, ("Deliver", "Deliver"): 1}


def test_genuine_rework_of_one_subobject_is_not_false():
    log = _ocel(["PO", "Pickup"], [("po", "PO"), ("k1", "Pickup")],
                [("Pickup", 1, ["po", "k1"]), ("Pickup", 2, ["po", "k1"])])
    assert flatten_ocel(log, "PO")[1].false_rework_edge_count == 0


def test_unknown_target_type():
    log = _ocel(["Order"], [("o1", "Order")], [("Create", 0, ["o1"])])
    with pytest.raises(SchemaError):
        flatten_ocel(log, "Invoice")


@given(st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_flattening_conservation(rng):
    log = ocel_log(rng, max_events=60)
    target = rng.choice(sorted(log.types))
    flat, report = flatten_ocel(log, target)
    assert report.duplicated_event_count == oracles.duplicated_copies(log, target)
    kept = len(log.events) - report.dropped_event_count
    assert len(flat) == kept + report.duplicated_event_count
    assert sum(f for f, _ in report.per_activity_inflation.values()) == len(flat)
