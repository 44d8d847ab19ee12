from datetime import timedelta

from generators import T0
from procmine.dot import dfg_to_dot, quote, render
from procmine.eventlog import FlatEvent, FlatLog, discover_dfg


def test_quote_escapes():
    assert quote('say "hi"\\') == '"say \\"hi\\"\\\\"'
    assert quote("two\nlines") == '"two\\nlines"'


def test_render_shape():
    text = render("g", [("A", {"x": 1})], [("A", "B", {})])
    assert text.splitlines()[0] == 'digraph "g" {'
    assert '  "A" ["x"="1"];' in text and '  "A" -> "B";' in text
    assert text.endswith("}\n")


def test_dfg_dot_lists_every_node_and_edge():
    log = FlatLog(tuple(FlatEvent("c", a, T0 + timedelta(minutes=i)) for i, a in enumerate("ABA")))
    text = dfg_to_dot(discover_dfg(log))
    assert text.count("->") == 2
    assert '"A" ["label"="A\\n2", "frequency"="2"];' in text
