"""Seeded random builders shared by the property suites.

Every builder takes a ``random.Random`` so hypothesis (via ``st.randoms``)
and the plain seeded loops in the acceptance suite draw from the same
distributions.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from procmine.eventlog import FlatEvent, FlatLog
from procmine.multilevel import EntitySchema, MultilevelRow
from procmine.ocel import OCEvent, OCELog, OCObject, OCObjectType
from procmine.orgmine.graph import JoinEdge, LogBinding, ObjectTable, build_join_graph

T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)

ML_SCHEMA = EntitySchema(("A", "B", "C"), {"A": "a_id", "B": "b_id", "C": "c_id"})
# each entity has its own alphabet, so bridge steps never repeat an activity
ML_ALPHABET = {"A": ("A1", "A2", "A3"), "B": ("B1", "B2"), "C": ("C1", "C2", "C3")}
ML_BRIDGE = {"B": "B-link", "C": "C-link"}


def multilevel_rows(rng: random.Random, cases: int = 3) -> list[MultilevelRow]:
    """Random A<B<C log; every composed case has at most six instances."""
    specs: list[tuple[str, tuple[tuple[str, str], ...], int]] = []  # (activity, links, minute)
    counter = {"A": 0, "B": 0, "C": 0}

    def new(entity: str) -> tuple[str, str]:
        counter[entity] += 1
        return (entity, f"{entity.lower()}{counter[entity]}")

    def lifecycle(inst: tuple[str, str], start: int) -> int:
        minute = start
        for _ in range(rng.randint(1, 4)):
            minute += rng.randint(0, 30)
            specs.append((rng.choice(ML_ALPHABET[inst[0]]), (inst,), minute))
        return minute

    def bridge(earlier: tuple[str, str], later: tuple[str, str], minute: int) -> None:
        specs.append((ML_BRIDGE[later[0]], (earlier, later), minute))

    for n in range(cases):
        base = n * 10_000
        c = new("C")
        bs = [new("B") for _ in range(rng.randint(0, 2))]
        end = base
        for b in bs:
            a_end = base
            if rng.random() < 0.6:
                a = new("A")
                a_end = lifecycle(a, base)
                bridge(a, b, a_end + rng.randint(1, 20))
            end = max(end, lifecycle(b, a_end + 30))
        link_time = end + rng.randint(1, 40)
        for b in bs:
            # parallel receipts usually land in one merged bridge event
            minute = link_time if rng.random() < 0.7 else link_time + rng.randint(1, 9)
            bridge(b, c, minute)
        lifecycle(c, base + rng.randint(0, 500))
    # an occasional orphan A that never reaches C
    if rng.random() < 0.5:
        lifecycle(new("A"), rng.randint(0, 40_000))

    rng.shuffle(specs)
    rows = []
    for index, (activity, links, minute) in enumerate(specs, start=1):
        ordered = tuple(sorted(links, key=lambda i: ML_SCHEMA.rank(i[0])))
        rows.append(MultilevelRow(index, activity, T0 + timedelta(minutes=minute), ordered))
    return rows


def ocel_log(rng: random.Random, max_events: int = 200) -> OCELog:
    n_types = rng.randint(1, 4)
    types = [OCObjectType(f"T{i}") for i in range(n_types)]
    objects = [OCObject(f"o{i}", rng.choice(types).name) for i in range(rng.randint(1, 12))]
    activities = ["a", "b", "c", "d", "e"][: rng.randint(1, 5)]
    events = []
    for i in range(rng.randint(1, max_events)):
        related = rng.sample(objects, rng.randint(1, min(4, len(objects))))
        events.append(OCEvent(f"e{i}", rng.choice(activities), T0 + timedelta(minutes=rng.randint(0, 5000)),
                              tuple((o.object_id, None) for o in related)))
    return OCELog.build(types, objects, events)


def join_graph(rng: random.Random, n_tables: int | None = None, edge_drop: float = 0.3):
    """Random tables T0..Tk with foreign keys, 1-3 bound processes.

    Returns the graph plus the list of processes to select.
    """
    n_tables = n_tables or rng.randint(2, 5)
    names = [f"T{i}" for i in range(n_tables)]
    keys = {t: [f"{t.lower()}_{j}" for j in range(rng.randint(1, 4))] for t in names}
    declared = []
    for src in names:
        for dst in names:
            if src != dst and rng.random() < 0.45:
                declared.append((src, f"fk_{dst.lower()}", dst))
    # a spanning chain so most graphs are connected before edges are dropped
    for a, b in zip(names, names[1:]):
        if not any({s, d} == {a, b} for s, _, d in declared):
            declared.append((b, f"fk_{a.lower()}", a))
    declared = [e for e in declared if rng.random() >= edge_drop]

    tables = []
    for t in names:
        fk_cols = sorted({col for s, col, _ in declared if s == t})
        rows = []
        for k in keys[t]:
            row = {"id": k}
            for col in fk_cols:
                dst = next(d for s, c, d in declared if s == t and c == col)
                roll = rng.random()
                row[col] = "" if roll < 0.15 else ("missing" if roll < 0.2 else rng.choice(keys[dst]))
            rows.append(row)
        tables.append(ObjectTable(t, "id", {c: "string" for c in ["id", *fk_cols]}, tuple(rows)))

    case_tables = rng.sample(names, rng.randint(1, min(3, n_tables)))
    bindings = []
    for p, t in enumerate(sorted(case_tables)):
        chosen = rng.sample(keys[t], rng.randint(1, len(keys[t])))
        events = [FlatEvent(cid, f"P{p}-x{rng.randint(0, 2)}", T0 + timedelta(minutes=rng.randint(0, 999)))
                  for cid in chosen for _ in range(rng.randint(1, 2))]
        bindings.append(LogBinding(f"P{p}", FlatLog(tuple(events)), t))
    edges = [JoinEdge(s, c, d, "id") for s, c, d in declared]
    graph = build_join_graph(tables, bindings, edges)
    return graph, [b.process_name for b in bindings]
