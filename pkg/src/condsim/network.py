"""Binary belief networks: data model, text format, joint evaluation.

A network is a DAG of binary nodes. Every node stores one table row per
parent configuration, and each row holds Pr[node = 1 | parents]. The joint
probability of a full assignment is the product of one table lookup per
node.

Text format (``.bnet``), one directive per line, ``#`` starts a comment:

    network <name>
    node <id>
    parents <id> : <p1> <p2> ...     (optional, parents declared earlier)
    cpt <id> : <r0> ... <r_{2^k-1}>  (k = parent count)
    prior <id> : <p>                 (parentless nodes)

Row order: the row index is the parent values read as a binary number with
the first listed parent as the most significant bit. All probabilities are
strictly between 0 and 1.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field
import heapq

from .errors import (
    BnetSyntaxError,
    CycleDetectedError,
    DuplicateNodeError,
    IncompleteAssignmentError,
    MissingParentBindingError,
    NetworkFormatError,
    ProbabilityOutOfRangeError,
    UndeclaredParentError,
    UnknownNodeError,
    WrongRowCountError,
)

# An assignment binds node names to values in {0, 1}.
Assignment = Mapping[str, int]


def _check_probability(p: float, line: int | None = None) -> float:
    if not (0.0 < p < 1.0):
        raise ProbabilityOutOfRangeError(
            f"probability {p!r} is not strictly between 0 and 1", line)
    return float(p)


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table of one binary node.

    ``rows[i]`` is Pr[node = 1 | parent configuration i] where i is the
    parent values read as a binary number, first listed parent most
    significant. A parentless node has the single row ``rows[0]``.
    """

    parents: tuple[str, ...]
    rows: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(set(self.parents)) != len(self.parents):
            raise NetworkFormatError(f"repeated parent in {self.parents}")
        if len(self.rows) != 1 << len(self.parents):
            raise WrongRowCountError(
                f"expected {1 << len(self.parents)} rows for "
                f"{len(self.parents)} parents, got {len(self.rows)}")
        for p in self.rows:
            _check_probability(p)

    def row_index(self, assignment: Assignment) -> int:
        """Table row selected by the parent values in ``assignment``."""
        index = 0
        for parent in self.parents:
            value = assignment.get(parent)
            if value is None:
                raise MissingParentBindingError(
                    f"parent {parent!r} is unbound")
            index = (index << 1) | _check_value(value, parent)
        return index


def _check_value(value: int, node: str) -> int:
    if value not in (0, 1):
        raise ValueError(f"node {node!r} bound to {value!r}, expected 0 or 1")
    return int(value)


def _topological_order(nodes: tuple[str, ...],
                       cpts: tuple[Cpt, ...]) -> tuple[int, ...]:
    """Kahn's algorithm with declaration-order tie breaking.

    When the declaration order is already topological (as the parser
    guarantees) the result equals it.
    """
    index = {name: i for i, name in enumerate(nodes)}
    children: list[list[int]] = [[] for _ in nodes]
    indegree = [0] * len(nodes)
    for i, cpt in enumerate(cpts):
        for parent in cpt.parents:
            children[index[parent]].append(i)
            indegree[i] += 1
    ready = [i for i, d in enumerate(indegree) if d == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for child in children[i]:
            indegree[child] -= 1
            if indegree[child] == 0:
                heapq.heappush(ready, child)
    if len(order) != len(nodes):
        stuck = [nodes[i] for i, d in enumerate(indegree) if d > 0]
        raise CycleDetectedError(f"cycle through {', '.join(stuck)}")
    return tuple(order)


@dataclass(frozen=True)
class BeliefNetwork:
    """Immutable network: node names in declaration order plus their tables.

    A topological order is computed and cached at construction; building a
    cyclic network raises :class:`CycleDetectedError`.
    """

    name: str
    nodes: tuple[str, ...]
    cpts: tuple[Cpt, ...]
    _index: dict = field(init=False, compare=False, repr=False)
    _topo: tuple[int, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.cpts):
            raise NetworkFormatError(
                f"{len(self.nodes)} nodes but {len(self.cpts)} tables")
        if not self.nodes:
            raise NetworkFormatError("a network needs at least one node")
        index: dict[str, int] = {}
        for i, node in enumerate(self.nodes):
            if not node or node.split() != [node]:
                raise NetworkFormatError(f"bad node identifier {node!r}")
            if node in index:
                raise DuplicateNodeError(f"node {node!r} declared twice")
            index[node] = i
        for node, cpt in zip(self.nodes, self.cpts):
            for parent in cpt.parents:
                if parent not in index:
                    raise UndeclaredParentError(
                        f"node {node!r} lists unknown parent {parent!r}")
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_topo",
                           _topological_order(self.nodes, self.cpts))

    @property
    def n(self) -> int:
        return len(self.nodes)

    def index(self, node: str) -> int:
        try:
            return self._index[node]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node!r}") from None

    def cpt(self, node: str) -> Cpt:
        return self.cpts[self.index(node)]

    def parents(self, node: str) -> tuple[str, ...]:
        return self.cpt(node).parents

    @property
    def topo_order(self) -> tuple[str, ...]:
        """Node names in the cached topological order."""
        return tuple(self.nodes[i] for i in self._topo)

    def validate_assignment(self, assignment: Assignment) -> None:
        """Check that every bound node exists and every value is 0 or 1."""
        for node, value in assignment.items():
            self.index(node)
            _check_value(value, node)


def parse_network(text: str) -> BeliefNetwork:
    """Parse ``.bnet`` source text into a :class:`BeliefNetwork`.

    Raises subclasses of :class:`NetworkFormatError` carrying the line
    number of the first problem found.
    """
    name: str | None = None
    declared: dict[str, Cpt] = {}
    order: list[str] = []
    pending: str | None = None
    pending_parents: tuple[str, ...] | None = None
    lineno = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]

        if name is None:
            if keyword != "network" or len(tokens) != 2:
                raise BnetSyntaxError(
                    "expected 'network <name>' as the first directive",
                    lineno)
            name = tokens[1]
            continue

        if keyword == "node":
            if len(tokens) != 2:
                raise BnetSyntaxError("expected 'node <id>'", lineno)
            if pending is not None:
                raise BnetSyntaxError(
                    f"node {pending!r} has no cpt or prior line", lineno)
            node = tokens[1]
            if node in declared:
                raise DuplicateNodeError(
                    f"node {node!r} declared twice", lineno)
            pending = node
            pending_parents = None
            continue

        if keyword in ("parents", "cpt", "prior"):
            if pending is None:
                raise BnetSyntaxError(
                    f"'{keyword}' outside a node block", lineno)
            if len(tokens) < 4 or tokens[1] != pending or tokens[2] != ":":
                raise BnetSyntaxError(
                    f"expected '{keyword} {pending} : ...'", lineno)
            body = tokens[3:]
        else:
            raise BnetSyntaxError(f"unknown directive {keyword!r}", lineno)

        if keyword == "parents":
            if pending_parents is not None:
                raise BnetSyntaxError(
                    f"duplicate parents line for node {pending!r}", lineno)
            for parent in body:
                if parent not in declared:
                    raise UndeclaredParentError(
                        f"parent {parent!r} of node {pending!r} is not "
                        "declared yet", lineno)
            if len(set(body)) != len(body):
                raise BnetSyntaxError(
                    f"node {pending!r} repeats a parent", lineno)
            pending_parents = tuple(body)
            continue

        # keyword is cpt or prior: the directive completes the node block.
        parents = pending_parents or ()
        rows: list[float] = []
        for token in body:
            try:
                value = float(token)
            except ValueError:
                raise BnetSyntaxError(
                    f"bad probability literal {token!r}", lineno) from None
            rows.append(_check_probability(value, lineno))
        expected = 1 << len(parents)
        if keyword == "prior" and len(rows) != 1:
            raise BnetSyntaxError(
                "'prior' takes exactly one probability", lineno)
        if len(rows) != expected:
            raise WrongRowCountError(
                f"node {pending!r} needs {expected} rows for "
                f"{len(parents)} parents, got {len(rows)}", lineno)
        declared[pending] = Cpt(parents, tuple(rows))
        order.append(pending)
        pending = None
        pending_parents = None

    if name is None:
        raise BnetSyntaxError("empty source, expected 'network <name>'", 1)
    if pending is not None:
        raise BnetSyntaxError(
            f"node {pending!r} has no cpt or prior line", lineno)
    return BeliefNetwork(name, tuple(order),
                         tuple(declared[node] for node in order))


def serialize_network(net: BeliefNetwork) -> str:
    """Render a network as ``.bnet`` text.

    Probabilities are written with ``repr`` so they survive a round trip
    bit for bit: ``parse_network(serialize_network(net)) == net``.
    """
    lines = [f"network {net.name}"]
    for node, cpt in zip(net.nodes, net.cpts):
        lines.append(f"node {node}")
        if cpt.parents:
            lines.append(f"parents {node} : " + " ".join(cpt.parents))
            lines.append(f"cpt {node} : " + " ".join(repr(r)
                                                     for r in cpt.rows))
        else:
            lines.append(f"prior {node} : {cpt.rows[0]!r}")
    return "\n".join(lines) + "\n"


def conditional_row(net: BeliefNetwork, node: str, node_value: int,
                    parent_assignment: Assignment) -> float:
    """Pr[node = node_value | parents as bound in ``parent_assignment``].

    ``parent_assignment`` must bind the node's parents and nothing else.
    """
    _check_value(node_value, node)
    row = net.cpt(node)
    extras = sorted(set(parent_assignment) - set(row.parents))
    if extras:
        raise MissingParentBindingError(
            f"bindings beyond the parents of {node!r}: "
            f"{', '.join(extras)}")
    p_one = row.rows[row.row_index(parent_assignment)]
    return p_one if node_value == 1 else 1.0 - p_one


def joint_probability(net: BeliefNetwork, full: Assignment) -> float:
    """Joint probability of a full assignment (every node bound)."""
    if len(full) != net.n:
        for node in net.nodes:
            if node not in full:
                raise IncompleteAssignmentError(f"node {node!r} is unbound")
        net.validate_assignment(full)  # surplus keys: raises UnknownNode
    product = 1.0
    for node, cpt in zip(net.nodes, net.cpts):
        value = full.get(node)
        if value is None:
            raise IncompleteAssignmentError(f"node {node!r} is unbound")
        _check_value(value, node)
        p_one = cpt.rows[cpt.row_index(full)]
        product *= p_one if value == 1 else 1.0 - p_one
    return product
