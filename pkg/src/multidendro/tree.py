"""Multivalued trees: hierarchies whose nodes carry height intervals.

Every internal node stores a lower and an upper height. A classical
dendrogram is the degenerate case h_lower == h_upper everywhere. Nodes may
have more than two children, which is how simultaneous merges of whole tied
groups are represented without picking an arbitrary pair order.

Canonical form: children are ordered by the smallest leaf index they cover,
and leaf indices follow input order. Two runs over relabeled input therefore
serialize identically up to the labels themselves.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import (
    DuplicateLabel,
    FormatError,
    ParseError,
    UnresolvedHeights,
)
from .proximity import KIND_DISTANCE, ProximityMatrix, condensed_size

_LABEL_RE = re.compile(r"[^\s(),\[\];]+")


@dataclass(frozen=True)
class Leaf:
    index: int
    label: str

    is_leaf = True
    h_lower = 0.0
    h_upper = 0.0
    fusion = None

    @property
    def min_leaf(self):
        return self.index

    def leaves(self):
        yield self


@dataclass(frozen=True)
class Internal:
    children: tuple
    h_lower: float
    h_upper: float
    fusion: "float | None" = None

    is_leaf = False

    @property
    def min_leaf(self):
        return min(c.min_leaf for c in self.children)

    def leaves(self):
        for child in self.children:
            yield from child.leaves()


def internal(children, h_lower, h_upper, fusion=None):
    """Build an internal node; children get canonical order."""
    children = tuple(sorted(children, key=lambda c: c.min_leaf))
    if len(children) < 2:
        raise ValueError("internal nodes need at least two children")
    return Internal(children, float(h_lower), float(h_upper),
                    None if fusion is None else float(fusion))


@dataclass(frozen=True)
class MultivaluedTree:
    """A hierarchy over labeled individuals with interval heights."""

    root: object
    labels: tuple
    method: "str | None" = None
    alpha: "float | None" = None
    policy: "str | None" = None
    height_decimals: int = 3

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise DuplicateLabel("tree labels must be distinct")

    @property
    def n(self):
        return len(self.labels)

    @property
    def is_valued(self):
        return all(nd.h_lower == nd.h_upper for nd in self.internal_nodes())

    def internal_nodes(self):
        """Preorder over internal nodes."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                continue
            yield node
            stack.extend(reversed(node.children))

    def node_heights(self):
        """Map frozenset of member labels -> (h_lower, h_upper, fusion)."""
        out = {}
        for node in self.internal_nodes():
            members = frozenset(leaf.label for leaf in node.leaves())
            out[members] = (node.h_lower, node.h_upper, node.fusion)
        return out


ValuedTree = MultivaluedTree  # degenerate case, kept as a reading aid


def single_leaf_tree(label, **tags):
    return MultivaluedTree(root=Leaf(0, str(label)), labels=(str(label),), **tags)


def resolve_height(node):
    """The single height of a node: the chosen fusion value if present,
    otherwise the interval bound when the interval is degenerate."""
    if node.is_leaf:
        return 0.0
    if node.fusion is not None:
        return node.fusion
    if node.h_lower == node.h_upper:
        return node.h_lower
    raise UnresolvedHeights(
        "node spans [%r, %r] and carries no fusion value"
        % (node.h_lower, node.h_upper)
    )


# ---- validation ----

@dataclass(frozen=True)
class TreeReport:
    errors: tuple
    reversals: tuple

    @property
    def ok(self):
        return not self.errors


def validate(tree):
    """Check structural and height axioms.

    Hard errors: duplicate or unknown leaves, internal nodes with fewer than
    two children, negative heights, inverted intervals, zero-height internal
    nodes, fusion values outside their interval. Height monotonicity failures
    between nested nodes are reported separately as reversals, since the
    centroid family can produce them on valid input.
    """
    errors = []
    reversals = []
    seen = []

    def name(node):
        return "{%s}" % ",".join(sorted(leaf.label for leaf in node.leaves()))

    def walk(node, parent):
        if node.is_leaf:
            seen.append(node.index)
            if not (0 <= node.index < tree.n) or tree.labels[node.index] != node.label:
                errors.append("leaf %r does not match the label table" % (node.label,))
            return
        if len(node.children) < 2:
            errors.append("internal node %s has fewer than two children" % name(node))
        if node.h_lower < 0 or node.h_upper < 0:
            errors.append("negative height on node %s" % name(node))
        if node.h_lower > node.h_upper:
            errors.append(
                "inverted interval [%r, %r] on node %s"
                % (node.h_lower, node.h_upper, name(node))
            )
        if node.h_lower == 0.0 or node.h_upper == 0.0:
            if not (node.h_lower == 0.0 and node.h_upper == 0.0):
                errors.append("half-zero interval on node %s" % name(node))
            else:
                errors.append(
                    "internal node %s sits at height zero (leaves only there)"
                    % name(node)
                )
        if node.fusion is not None and not (
            node.h_lower <= node.fusion <= node.h_upper
        ):
            errors.append(
                "fusion %r outside [%r, %r] on node %s"
                % (node.fusion, node.h_lower, node.h_upper, name(node))
            )
        if parent is not None:
            if node.h_upper > parent.h_lower:
                reversals.append(
                    "node %s tops out at %r, above its parent start %r"
                    % (name(node), node.h_upper, parent.h_lower)
                )
            if (node.fusion is not None and parent.fusion is not None
                    and node.fusion > parent.fusion):
                reversals.append(
                    "node %s fuses at %r, above its parent fusion %r"
                    % (name(node), node.fusion, parent.fusion)
                )
        for child in node.children:
            walk(child, node)

    walk(tree.root, None)
    if sorted(seen) != list(range(tree.n)):
        errors.append("leaves do not cover the label table exactly once")
    return TreeReport(tuple(errors), tuple(reversals))


# ---- comparison ----

def tree_equal(a, b, tol=1e-9):
    """True when both trees nest the same label sets at the same heights.

    Heights compare within absolute ``tol``; child order and leaf numbering
    do not matter.
    """
    if set(a.labels) != set(b.labels):
        return False
    ha = a.node_heights()
    hb = b.node_heights()
    if set(ha) != set(hb):
        return False
    for members, (lo_a, up_a, _) in ha.items():
        lo_b, up_b, _ = hb[members]
        if abs(lo_a - lo_b) > tol or abs(up_a - up_b) > tol:
            return False
    return True


# ---- cophenetic matrix ----

def cophenetic_matrix(tree):
    """Pairwise heights at which leaves first share a node.

    Needs every interval resolved to a single height, either degenerate or
    via a fusion value; otherwise UnresolvedHeights.
    """
    n = tree.n
    values = [0.0] * condensed_size(n)

    def walk(node):
        if node.is_leaf:
            return [node.index]
        h = resolve_height(node)
        groups = [walk(c) for c in node.children]
        for gi in range(len(groups)):
            for gj in range(gi + 1, len(groups)):
                for i in groups[gi]:
                    for j in groups[gj]:
                        a, b = (i, j) if i < j else (j, i)
                        values[a * (2 * n - a - 1) // 2 + (b - a - 1)] = h
        return [i for g in groups for i in g]

    walk(tree.root)
    return ProximityMatrix(tree.labels, tuple(values), precision=None,
                           kind=KIND_DISTANCE)


# ---- extended newick ----

def to_newick_extended(tree, decimals=None):
    """Serialize with bracketed intervals: (a,b,c)[h_lower,h_upper];

    Labels must be free of whitespace and of the delimiters ()[],; so the
    format stays unambiguous.
    """
    d = tree.height_decimals if decimals is None else decimals

    def fmt(h):
        return "%.*f" % (d, h)

    def walk(node):
        if node.is_leaf:
            if not _LABEL_RE.fullmatch(node.label):
                raise FormatError("label %r not serializable" % (node.label,))
            return node.label
        inner = ",".join(walk(c) for c in node.children)
        return "(%s)[%s,%s]" % (inner, fmt(node.h_lower), fmt(node.h_upper))

    return walk(tree.root) + ";"


def parse_newick_extended(text):
    """Inverse of to_newick_extended on canonical output."""
    pos = 0
    labels = []
    decimals_seen = 0

    def fail(message):
        raise ParseError(message, pos)

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def expect(ch):
        nonlocal pos
        skip_ws()
        if pos >= len(text) or text[pos] != ch:
            fail("expected %r" % (ch,))
        pos += 1

    def parse_height():
        nonlocal pos, decimals_seen
        skip_ws()
        m = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?").match(text, pos)
        if not m:
            fail("expected a height")
        tok = m.group(0)
        pos = m.end()
        if "e" not in tok and "E" not in tok and "." in tok:
            decimals_seen = max(decimals_seen, len(tok.split(".", 1)[1]))
        return float(tok)

    def parse_node():
        nonlocal pos
        skip_ws()
        if pos >= len(text):
            fail("unexpected end of input")
        if text[pos] == "(":
            pos += 1
            children = [parse_node()]
            skip_ws()
            while pos < len(text) and text[pos] == ",":
                pos += 1
                children.append(parse_node())
                skip_ws()
            expect(")")
            if len(children) < 2:
                fail("internal nodes need at least two children")
            expect("[")
            lo = parse_height()
            expect(",")
            up = parse_height()
            expect("]")
            return internal(children, lo, up)
        m = _LABEL_RE.match(text, pos)
        if not m:
            fail("expected a label")
        label = m.group(0)
        pos = m.end()
        if label in labels:
            raise ParseError("label %r appears twice" % (label,), pos)
        labels.append(label)
        return Leaf(len(labels) - 1, label)

    root = parse_node()
    expect(";")
    skip_ws()
    if pos != len(text):
        fail("trailing text after ';'")

    # reindex leaves by sorted label so equal trees parse identically
    order = {label: i for i, label in enumerate(sorted(labels))}

    def remap(node):
        if node.is_leaf:
            return Leaf(order[node.label], node.label)
        return internal([remap(c) for c in node.children],
                        node.h_lower, node.h_upper, node.fusion)

    return MultivaluedTree(root=remap(root), labels=tuple(sorted(labels)),
                           height_decimals=max(3, decimals_seen))


# ---- records document ----

FORMAT_VERSION = "1"


def to_records(tree, trace=None):
    """Lossless dict form of a tree plus, when given, its merge trace.

    Node ids: leaves are 0..n-1 in label order, merges continue upward in
    formation order (taken from the trace when present, otherwise assigned
    bottom-up by lowest height, then smallest member leaf).
    """
    index = {label: i for i, label in enumerate(tree.labels)}
    merges = []

    if trace is not None:
        node_ids = _ids_from_trace(tree, trace)
    else:
        node_ids = _ids_bottom_up(tree)

    def walk(node, parent):
        if node.is_leaf:
            return
        reversal = False
        if parent is not None:
            if node.h_upper > parent.h_lower:
                reversal = True
            if (node.fusion is not None and parent.fusion is not None
                    and node.fusion > parent.fusion):
                reversal = True
        child_ids = []
        for child in node.children:
            if child.is_leaf:
                child_ids.append(index[child.label])
            else:
                child_ids.append(node_ids[id(child)])
        merges.append({
            "id": node_ids[id(node)],
            "children": child_ids,
            "members": sorted((leaf.label for leaf in node.leaves()),
                              key=lambda lab: index[lab]),
            "h_lower": node.h_lower,
            "h_upper": node.h_upper,
            "fusion": node.fusion,
            "reversal": reversal,
        })
        for child in node.children:
            walk(child, node)

    walk(tree.root, None)
    merges.sort(key=lambda rec: rec["id"])
    doc = {
        "format_version": FORMAT_VERSION,
        "labels": list(tree.labels),
        "method": tree.method,
        "alpha": tree.alpha,
        "policy": tree.policy,
        "height_decimals": tree.height_decimals,
        "merges": merges,
        "trace": None if trace is None else _trace_to_dict(trace),
    }
    return doc


def _ids_bottom_up(tree):
    nodes = list(tree.internal_nodes())
    nodes.sort(key=lambda nd: (nd.h_lower, nd.min_leaf))
    return {id(nd): tree.n + k for k, nd in enumerate(nodes)}


def _ids_from_trace(tree, trace):
    by_members = {}
    for it in trace.iterations:
        for grp in it.groups:
            if grp.h_lower is not None:
                by_members[frozenset(grp.leaves)] = grp.cluster_id
    ids = {}
    for node in tree.internal_nodes():
        members = frozenset(leaf.index for leaf in node.leaves())
        if members not in by_members:
            raise FormatError("trace does not describe this tree")
        ids[id(node)] = by_members[members]
    return ids


def _trace_to_dict(trace):
    return {
        "n_items": trace.n_items,
        "labels": list(trace.labels),
        "method": trace.method,
        "alpha": trace.alpha,
        "policy": trace.policy,
        "precision": trace.precision,
        "notes": list(trace.notes),
        "iterations": [
            {
                "index": it.index,
                "d_lower": it.d_lower,
                "d_next": it.d_next,
                "reversal": it.reversal,
                "groups": [
                    {
                        "cluster_id": g.cluster_id,
                        "member_ids": list(g.member_ids),
                        "leaves": list(g.leaves),
                        "h_lower": g.h_lower,
                        "h_upper": g.h_upper,
                        "fusion": g.fusion,
                    }
                    for g in it.groups
                ],
            }
            for it in trace.iterations
        ],
    }


def records_to_json(doc):
    """Deterministic text form of a records document."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def parse_records(source):
    """Rebuild (tree, trace) from a records document or its JSON text."""
    doc = json.loads(source) if isinstance(source, str) else source
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError("unsupported records version %r" % (doc.get("format_version"),))
    labels = tuple(doc["labels"])
    nodes = {i: Leaf(i, lab) for i, lab in enumerate(labels)}
    consumed = set()
    for rec in sorted(doc["merges"], key=lambda r: r["id"]):
        children = []
        for cid in rec["children"]:
            if cid not in nodes:
                raise FormatError("merge %r references unknown id %r" % (rec["id"], cid))
            if cid in consumed:
                raise FormatError("id %r used as a child twice" % (cid,))
            consumed.add(cid)
            children.append(nodes[cid])
        nodes[rec["id"]] = internal(children, rec["h_lower"], rec["h_upper"],
                                    rec.get("fusion"))
    roots = [nid for nid in nodes if nid not in consumed]
    if len(roots) != 1:
        raise FormatError("records describe %d roots" % (len(roots),))
    tree = MultivaluedTree(
        root=nodes[roots[0]],
        labels=labels,
        method=doc.get("method"),
        alpha=doc.get("alpha"),
        policy=doc.get("policy"),
        height_decimals=doc.get("height_decimals", 3),
    )
    trace = None
    if doc.get("trace") is not None:
        from .agglomerate import GroupRecord, IterationRecord, MergeTrace

        td = doc["trace"]
        trace = MergeTrace(
            n_items=td["n_items"],
            labels=tuple(td["labels"]),
            method=td["method"],
            alpha=td["alpha"],
            policy=td["policy"],
            precision=td["precision"],
            iterations=tuple(
                IterationRecord(
                    index=it["index"],
                    d_lower=it["d_lower"],
                    groups=tuple(
                        GroupRecord(
                            cluster_id=g["cluster_id"],
                            member_ids=tuple(g["member_ids"]),
                            leaves=tuple(g["leaves"]),
                            h_lower=g["h_lower"],
                            h_upper=g["h_upper"],
                            fusion=g["fusion"],
                        )
                        for g in it["groups"]
                    ),
                    d_next=it["d_next"],
                    reversal=it["reversal"],
                )
                for it in td["iterations"]
            ),
            notes=tuple(td["notes"]),
        )
    return tree, trace
