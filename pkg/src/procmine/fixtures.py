"""Deterministic demo datasets, written to disk by ``procmine gen``.

p2p-mini         multilevel Order/Receipt/Invoice log, 11 rows
order-processing object-centric order log (Order, Product, Customer, Carrier)
org-trio         sales, purchasing and delivery logs over item tables
org-counts-567   sales/purchase/delivery chain sized so that the
                 "Credit Check" -> "Requisition Created" edge is witnessed
                 by 5 deliveries, 6 purchase orders and 7 sales orders
"""

from __future__ import annotations

import csv
import io
import json
import random
from datetime import datetime, timedelta, timezone
from decimal import Decimal
from pathlib import Path

from procmine.errors import ConfigError
from procmine.eventlog import FlatEvent, FlatLog, write_flat_csv
from procmine.ocel import OCEvent, OCELog, OCObject, OCObjectType, write_ocel_json
from procmine.orgmine.graph import JoinGraph, LogBinding, ObjectTable, build_join_graph, join_edge

FIXTURES = ("p2p-mini", "order-processing", "org-trio", "org-counts-567")
SEED = 20240501


def _ts(text: str) -> datetime:
    return datetime.fromisoformat(text).replace(tzinfo=timezone.utc)


def _csv(header: list[str], rows: list[list[str]]) -> bytes:
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


def _json(data: object) -> bytes:
    return (json.dumps(data, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


# -- p2p-mini ------------------------------------------------------------------

P2P_ORDER = "4500150844"
P2P_ORPHAN_ORDER = "4500150845"
P2P_RECEIPTS = ("5000531890", "5000531891")
P2P_INVOICE = "5105600001"

P2P_SCHEMA = {
    "entities": ["Order", "Receipt", "Invoice"],
    "processid_columns": {"Order": "Order ID", "Receipt": "Receipt ID", "Invoice": "Invoice ID"},
    "activity_column": "Activity",
    "timestamp_column": "Timestamp",
}

# (activity, order, receipt, invoice, timestamp)
P2P_ROWS = (
    ("Order Creation", P2P_ORDER, "", "", "2024-03-01T09:00:00"),
    ("Order Approved", P2P_ORDER, "", "", "2024-03-01T15:30:00"),
    ("Goods Receipt Created", P2P_ORDER, P2P_RECEIPTS[0], "", "2024-03-04T10:00:00"),
    ("Goods Receipt Confirmed", "", P2P_RECEIPTS[0], "", "2024-03-04T16:00:00"),
    ("Goods Receipt Created", P2P_ORDER, P2P_RECEIPTS[1], "", "2024-03-06T11:00:00"),
    ("Goods Receipt Confirmed", "", P2P_RECEIPTS[1], "", "2024-03-07T09:30:00"),
    ("Invoice Created", "", "", P2P_INVOICE, "2024-03-08T10:00:00"),
    ("Invoice Confirmed", "", P2P_RECEIPTS[0], P2P_INVOICE, "2024-03-09T14:00:00"),
    ("Invoice Confirmed", "", P2P_RECEIPTS[1], P2P_INVOICE, "2024-03-09T14:00:00"),
    ("Order Creation", P2P_ORPHAN_ORDER, "", "", "2024-03-10T09:00:00"),
    ("Order Approved", P2P_ORPHAN_ORDER, "", "", "2024-03-11T12:00:00"),
)

P2P_REFERENCE = {
    "activities": [
        {"activity": "Order Creation", "entity": "Order"},
        {"activity": "Order Approved", "entity": "Order"},
        {"activity": "Goods Receipt Created", "entity": "Receipt"},
        {"activity": "Goods Receipt Confirmed", "entity": "Receipt"},
        {"activity": "Invoice Created", "entity": "Invoice"},
        {"activity": "Invoice Confirmed", "entity": "Invoice"},
    ],
    "edges": [
        ["Order Creation", "Order Approved"],
        ["Order Approved", "Goods Receipt Created"],
        ["Goods Receipt Created", "Goods Receipt Confirmed"],
        ["Goods Receipt Confirmed", "Invoice Confirmed"],
        ["Invoice Created", "Invoice Confirmed"],
    ],
    "start": ["Order Creation", "Invoice Created"],
    "end": ["Order Approved", "Invoice Confirmed"],
}


def p2p_mini_csv() -> bytes:
    header = ["Activity", "Order ID", "Receipt ID", "Invoice ID", "Timestamp"]
    return _csv(header, [list(r) for r in P2P_ROWS])


def p2p_mini_files() -> dict[str, bytes]:
    config = {"mode": "multilevel", "input": "p2p-mini.csv", "schema": P2P_SCHEMA, "reference": "p2p-reference.json"}
    return {
        "p2p-mini.csv": p2p_mini_csv(),
        "p2p-reference.json": _json(P2P_REFERENCE),
        "p2p-mini.json": _json(config),
    }


# -- order-processing ----------------------------------------------------------


def order_processing_log(orders: int = 12, seed: int = SEED) -> OCELog:
    rng = random.Random(seed)
    types = [
        OCObjectType("Order", {"total": "number"}),
        OCObjectType("Product", {"category": "string"}),
        OCObjectType("Customer", {"name": "string"}),
        OCObjectType("Carrier", {"name": "string"}),
    ]
    start = _ts("2024-02-01T08:00:00")
    customers = [OCObject(f"C{i}", "Customer", ((start, "name", f"Customer {i}"),)) for i in range(1, 5)]
    carriers = [OCObject(f"K{i}", "Carrier", ((start, "name", f"Carrier {i}"),)) for i in range(1, 3)]
    products: list[OCObject] = []
    order_objs: list[OCObject] = []
    events: list[OCEvent] = []

    def add(activity: str, when: datetime, objs: list[str]) -> None:
        events.append(OCEvent(f"ev{len(events) + 1:04d}", activity, when, tuple((o, None) for o in objs)))

    for n in range(1, orders + 1):
        created = start + timedelta(hours=7 * n, minutes=rng.randrange(60))
        order_id = f"O{n}"
        customer = rng.choice(customers).object_id
        # the first order is the plain one-order/one-product/one-customer case
        count = 1 if n == 1 else rng.randint(1, 3)
        items = []
        for k in range(count):
            pid = f"P{len(products) + 1}"
            products.append(OCObject(pid, "Product", ((created, "category", rng.choice(["tools", "books", "food"])),)))
            items.append(pid)
        order_objs.append(OCObject(order_id, "Order", ((created, "total", round(rng.uniform(20, 400), 2)),)))
        add("Order Creation", created, [order_id, *items, customer])
        add("Order Confirmation", created + timedelta(hours=2), [order_id, *items])
        add("Payment Received", created + timedelta(hours=5 + rng.randrange(20)), [order_id, customer])
        for k, pid in enumerate(items):
            shipped = created + timedelta(days=1, hours=k)
            carrier = rng.choice(carriers).object_id
            add("Product Shipped", shipped, [pid, carrier])
            add("Product Delivered", shipped + timedelta(days=rng.randint(1, 3)), [pid, carrier])
    events.sort(key=lambda e: e.timestamp)
    return OCELog.build(types, order_objs + products + customers + carriers, events)


def order_processing_files() -> dict[str, bytes]:
    config = {"mode": "ocel", "input": "order-processing.json", "target_type": "Product"}
    return {
        "order-processing.json": write_ocel_json(order_processing_log()).encode("utf-8"),
        "order-processing-project.json": _json(config),
    }


# -- organization fixtures -----------------------------------------------------


def _flat_log(rows: list[tuple], name: str) -> FlatLog:
    """rows: (case, activity, start, end, resource, cost, automated)."""
    events = []
    for case, activity, start, end, resource, cost, automated in rows:
        events.append(FlatEvent(case, activity, start, end, resource,
                                None if cost is None else Decimal(cost), automated))
    return FlatLog(tuple(events), name)


def org_trio(with_review: bool = True) -> dict:
    """Sales, purchasing and delivery processes over item tables.

    Sales item S1 is linked to two purchase order items (the divergent
    case).  A ShipmentLink association table offers alternative join trees
    that do not go through primary keys and get discarded.  With
    ``with_review`` some requisitions pass through an extra review step.
    """
    base = _ts("2024-04-01T08:00:00")
    so_items = ["S1", "S2", "S3", "S4"]
    po_items = [("P1", "S1"), ("P2", "S1"), ("P3", "S2"), ("P4", "S3"), ("P5", "S4")]
    deliveries = [("D1", "P1"), ("D2", "P2"), ("D3", "P3"), ("D4", "P4"), ("D5", "P5")]

    tables = {
        "SalesOrderItem": (["so_item", "material"], [[s, f"M{i % 2 + 1}"] for i, s in enumerate(so_items)], "so_item"),
        "PurchaseOrderItem": (["po_item", "so_item"], [[p, s] for p, s in po_items], "po_item"),
        "DeliveryItem": (["delivery_item", "po_item"], [[d, p] for d, p in deliveries], "delivery_item"),
        "ShipmentLink": (["link_id", "delivery_item", "so_item"],
                         [[f"L{i + 1}", d, dict(po_items)[p]] for i, (d, p) in enumerate(deliveries)], "link_id"),
    }

    sales, purchasing, delivery = [], [], []
    for i, s in enumerate(so_items):
        t0 = base + timedelta(days=2 * i)
        sales.append((s, "Sales Order Created", t0, t0 + timedelta(minutes=20), "clerk", "12.50", False))
        sales.append((s, "Credit Check", t0 + timedelta(hours=1), t0 + timedelta(hours=1, minutes=5), "system", "1.00", True))
        sales.append((s, "Sales Order Released", t0 + timedelta(hours=30), None, "clerk", None, False))
    for j, (p, s) in enumerate(po_items):
        t0 = base + timedelta(days=2 * so_items.index(s), hours=3 + j)
        purchasing.append((p, "Requisition Created", t0, t0 + timedelta(minutes=15), "buyer", "5.00", False))
        if with_review and j % 2 == 0:
            purchasing.append((p, "Review Requisition", t0 + timedelta(hours=1), t0 + timedelta(hours=2), "manager", None, False))
        purchasing.append((p, "Requisition Approved", t0 + timedelta(hours=4), t0 + timedelta(hours=4, minutes=10), "manager", None, False))
        purchasing.append((p, "Purchase Order Created", t0 + timedelta(hours=6), t0 + timedelta(hours=7), "buyer", "20.00", True))
    for k, (d, p) in enumerate(deliveries):
        po_start = [r for r in purchasing if r[0] == p][0][2]
        t0 = po_start + timedelta(days=1)
        delivery.append((d, "Delivery Created", t0, t0 + timedelta(minutes=30), "warehouse", "3.00", True))
        delivery.append((d, "Goods Issued", t0 + timedelta(hours=5), t0 + timedelta(hours=6), "warehouse", "8.00", False))
        delivery.append((d, "Delivery Completed", t0 + timedelta(days=2), None, "carrier", None, False))

    logs = {
        "Sales": (_flat_log(sales, "Sales"), "SalesOrderItem"),
        "Purchasing": (_flat_log(purchasing, "Purchasing"), "PurchaseOrderItem"),
        "Delivery": (_flat_log(delivery, "Delivery"), "DeliveryItem"),
    }
    joins = [
        ("PurchaseOrderItem", "so_item", "SalesOrderItem"),
        ("DeliveryItem", "po_item", "PurchaseOrderItem"),
        ("ShipmentLink", "delivery_item", "DeliveryItem"),
        ("ShipmentLink", "so_item", "SalesOrderItem"),
    ]
    return {"tables": tables, "logs": logs, "joins": joins}


def org_counts_567() -> dict:
    """Seven sales orders feeding six purchase orders, five delivered.

    Sales orders S6 and S7 share purchase order P6, which has no delivery.
    """
    base = _ts("2024-05-06T08:00:00")
    purchase_orders = [f"P{k}" for k in range(1, 7)]
    sales_orders = [(f"S{k}", f"P{min(k, 6)}") for k in range(1, 8)]
    deliveries = [(f"D{k}", f"P{k}") for k in range(1, 6)]
    tables = {
        "SalesOrder": (["so_id", "po_id"], [[s, p] for s, p in sales_orders], "so_id"),
        "PurchaseOrder": (["po_id", "vendor"], [[p, f"V{i % 3 + 1}"] for i, p in enumerate(purchase_orders)], "po_id"),
        "Delivery": (["delivery_id", "po_id"], [[d, p] for d, p in deliveries], "delivery_id"),
    }
    sales, purchasing, delivery = [], [], []
    for s, p in sales_orders:
        day = base + timedelta(days=int(p[1:]) - 1)
        offset = timedelta(minutes=30) if s == "S7" else timedelta(0)
        sales.append((s, "Sales Order Created", day + offset, None, "clerk", None, None))
        sales.append((s, "Credit Check", day + timedelta(hours=1) + offset, None, "system", None, True))
    for p in purchase_orders:
        day = base + timedelta(days=int(p[1:]) - 1)
        purchasing.append((p, "Requisition Created", day + timedelta(hours=2), None, "buyer", None, None))
        purchasing.append((p, "Purchase Order Created", day + timedelta(hours=4), None, "buyer", None, None))
    for d, p in deliveries:
        day = base + timedelta(days=int(p[1:]) - 1)
        delivery.append((d, "Delivery Created", day + timedelta(hours=8), None, "warehouse", None, None))
        delivery.append((d, "Goods Issued", day + timedelta(hours=10), None, "warehouse", None, None))
    logs = {
        "Sales Order": (_flat_log(sales, "Sales Order"), "SalesOrder"),
        "Purchase Order": (_flat_log(purchasing, "Purchase Order"), "PurchaseOrder"),
        "Delivery": (_flat_log(delivery, "Delivery"), "Delivery"),
    }
    joins = [("SalesOrder", "po_id", "PurchaseOrder"), ("Delivery", "po_id", "PurchaseOrder")]
    return {"tables": tables, "logs": logs, "joins": joins}


def build_org_graph(spec: dict) -> JoinGraph:
    """In-memory join graph for an ``org_trio``/``org_counts_567`` spec."""
    tables = {
        name: ObjectTable(name, pk, {h: "string" for h in header}, tuple(dict(zip(header, r)) for r in rows))
        for name, (header, rows, pk) in spec["tables"].items()
    }
    bindings = [LogBinding(process, log, table) for process, (log, table) in spec["logs"].items()]
    edges = [join_edge(tables, f, c, t) for f, c, t in spec["joins"]]
    return build_join_graph(tables.values(), bindings, edges)


def _slug(name: str) -> str:
    return name.lower().replace(" ", "-")


def org_files(spec: dict, conformance: dict | None = None) -> dict[str, bytes]:
    files: dict[str, bytes] = {}
    project: dict = {"mode": "org", "tables": [], "logs": [], "joins": []}
    for name, (header, rows, pk) in spec["tables"].items():
        fname = f"table-{_slug(name)}.csv"
        files[fname] = _csv(header, rows)
        project["tables"].append({"name": name, "file": fname, "primary_key": pk})
    for process, (log, table) in spec["logs"].items():
        fname = f"log-{_slug(process)}.csv"
        files[fname] = write_flat_csv(log)
        project["logs"].append({"process_name": process, "file": fname, "case_target": {"table": table}})
    for from_table, column, to_table in spec["joins"]:
        project["joins"].append({"from": {"table": from_table, "column": column}, "to": {"table": to_table}})
    if conformance:
        project["conformance"] = conformance
    files["project.json"] = _json(project)
    return files


TRIO_CONFORMANCE = {
    "filters": [
        {"name": "no manual review", "forbidden": ["Review Requisition"]},
        {"name": "order to cash", "sequence": ["Credit Check", "Requisition Created", "Goods Issued"]},
    ],
    "metrics": [
        {"name": "requisition to PO within 8h", "from": "Requisition Created", "to": "Purchase Order Created",
         "max_seconds": 8 * 3600},
        {"name": "credit check to delivery", "from": "Credit Check", "to": "Delivery Created", "max_seconds": 26 * 3600},
    ],
}


def generate(name: str) -> dict[str, bytes]:
    if name == "p2p-mini":
        return p2p_mini_files()
    if name == "order-processing":
        return order_processing_files()
    if name == "org-trio":
        return org_files(org_trio(), TRIO_CONFORMANCE)
    if name == "org-counts-567":
        return org_files(org_counts_567())
    raise ConfigError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")


def write_fixture(name: str, out_dir: Path) -> list[Path]:
    files = generate(name)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fname, payload in sorted(files.items()):
        path = out_dir / fname
        path.write_bytes(payload)
        written.append(path)
    return written

