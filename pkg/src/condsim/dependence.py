"""Per-node probability bounds, dependence values, and the cost model.

For a node whose parents are only partially bound, the conditional
probability of seeing a given value ranges over an interval [lo, hi]
(one endpoint per reachable table row). The node's lambda compresses that
interval into a worst-case ratio, and the product of squared lambdas is
the network's dependence value for the bound set. The dependence value
feeds a two-term cost model that prices conditioning a set of nodes:
a simulation-difficulty term and a weight-estimation term.
"""

from dataclasses import dataclass
from collections.abc import Sequence

from .errors import NonPositivePhiMinError, OverlappingSetsError, UnknownNodeError
from .network import Assignment, BeliefNetwork


@dataclass(frozen=True)
class NodeBounds:
    """Extremes of one node's conditional probability over free parents."""

    lo: float
    hi: float


@dataclass(frozen=True)
class CostEstimate:
    """Predicted cost split of conditioning a node set.

    ``subproblem_term`` prices simulating all instantiations of the set;
    ``weight_term`` prices estimating the set's weight vector, using the
    analytic lower bound ``phi_min_bound`` for the rarest instantiation.
    """

    subproblem_term: float
    weight_term: float
    phi_min_bound: float


@dataclass(frozen=True)
class DependenceReport:
    """Bounds and lambda per node, and the resulting dependence value."""

    per_node: dict[str, tuple[NodeBounds, float]]
    value: float
    fixed: dict[str, int]
    conditioning: tuple[str, ...]


def node_bounds(net: BeliefNetwork, node: str, node_value: int,
                fixed: Assignment) -> NodeBounds:
    """Range of Pr[node = node_value | parents] over free parent values.

    Parents bound in ``fixed`` are pinned to their values; the remaining
    parents range over both values. Bindings of the node itself or of
    non-parents are ignored.
    """
    if node_value not in (0, 1):
        raise ValueError(f"node value must be 0 or 1, got {node_value!r}")
    net.validate_assignment(fixed)
    cpt = net.cpt(node)
    k = len(cpt.parents)
    pinned = [(k - 1 - j, fixed[parent])
              for j, parent in enumerate(cpt.parents) if parent in fixed]
    lo = hi = None
    for row in range(1 << k):
        if any((row >> shift) & 1 != value for shift, value in pinned):
            continue
        p = cpt.rows[row] if node_value == 1 else 1.0 - cpt.rows[row]
        if lo is None or p < lo:
            lo = p
        if hi is None or p > hi:
            hi = p
    return NodeBounds(lo, hi)


def node_lambda(net: BeliefNetwork, node: str, fixed: Assignment,
                conditioning: Sequence[str] = ()) -> float:
    """Worst-case probability ratio contributed by one node.

    ``fixed`` binds nodes with known values (evidence); ``conditioning``
    names nodes that are held fixed but instantiated both ways, so they
    count as bound for the all-parents-bound rule while their own lambda
    takes the max over both value branches.

    Returns exactly 1.0 for parentless nodes and for nodes whose parents
    are all bound.
    """
    net.validate_assignment(fixed)
    cpt = net.cpt(node)
    bound = set(fixed) | set(conditioning)
    if not cpt.parents or all(p in bound for p in cpt.parents):
        return 1.0
    b = node_bounds(net, node, 1, fixed)
    if node in fixed:
        if fixed[node] == 1:
            return b.hi / b.lo
        return (1.0 - b.lo) / (1.0 - b.hi)
    return max(b.hi / b.lo, (1.0 - b.lo) / (1.0 - b.hi))


def dependence_value(net: BeliefNetwork, fixed: Assignment,
                     conditioning: Sequence[str] = ()) -> DependenceReport:
    """Product over all nodes of lambda squared, with per-node detail.

    The report's bounds are for node value 1. The value is always >= 1 and
    never increases when more nodes are bound.
    """
    per_node: dict[str, tuple[NodeBounds, float]] = {}
    value = 1.0
    for node in net.nodes:
        b = node_bounds(net, node, 1, fixed)
        lam = node_lambda(net, node, fixed, conditioning)
        per_node[node] = (b, lam)
        value *= lam * lam
    return DependenceReport(per_node, value, dict(fixed),
                            tuple(conditioning))


def phi_min_lower_bound(net: BeliefNetwork,
                        subset: Sequence[str]) -> float:
    """Analytic lower bound on the rarest joint instantiation of a set.

    The product over the set of min(lo, 1 - hi), with bounds taken over
    all parent configurations. Any full instantiation of the set has at
    least this probability, by the chain rule. Empty set: 1.
    """
    if len(set(subset)) != len(subset):
        raise UnknownNodeError(f"repeated node in {list(subset)}")
    product = 1.0
    for node in subset:
        b = node_bounds(net, node, 1, {})
        product *= min(b.lo, 1.0 - b.hi)
    return product


def predicted_cost(net: BeliefNetwork, evidence: Assignment,
                   conditioning: Sequence[str]) -> CostEstimate:
    """Two-term cost prediction for conditioning the given node set.

    subproblem_term = 2^|S| * D^4 with D the dependence value after
    binding evidence and the set; weight_term = 2^|S| divided by the
    analytic lower bound on the rarest instantiation probability.
    """
    overlap = set(evidence) & set(conditioning)
    if overlap:
        raise OverlappingSetsError(
            f"conditioning set overlaps evidence on {sorted(overlap)}")
    d = dependence_value(net, evidence, conditioning).value
    scale = float(1 << len(conditioning))
    phi_bound = phi_min_lower_bound(net, conditioning)
    if phi_bound <= 0.0:
        raise NonPositivePhiMinError(
            f"instantiation bound collapsed to {phi_bound}")
    return CostEstimate(subproblem_term=scale * d ** 4,
                        weight_term=scale / phi_bound,
                        phi_min_bound=phi_bound)


def satisfies_ras(phi: float, mu: float, epsilon: float) -> bool:
    """Whether mu approximates phi within relative factor (1 + epsilon).

    True iff phi / (1 + epsilon) <= mu <= phi * (1 + epsilon).
    """
    if phi <= 0.0:
        raise ValueError(f"phi must be positive, got {phi!r}")
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    return phi / (1.0 + epsilon) <= mu <= phi * (1.0 + epsilon)
