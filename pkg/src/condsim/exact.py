"""Exact inference by full enumeration, for checking sampled answers.

Every query is answered by summing the joint probability over complete
assignments, so cost grows as 2**n. Calls are refused above the size
guards (25 nodes, 20 projection nodes). Enumeration follows a fixed state
order (declaration-order bits, node 0 most significant), so repeated calls
return bit-identical values.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    NetworkTooLargeError,
    OverlappingAssignmentsError,
    UnknownNodeError,
)
from .network import Assignment, BeliefNetwork

MAX_NODES = 25
MAX_PROJECTION = 20

# Networks up to this size keep a cached joint table; larger ones are
# enumerated in fixed-size chunks to bound memory.
_TABLE_MAX_NODES = 20
_CHUNK = 1 << 20


@dataclass(frozen=True)
class OracleResult:
    """An exact value plus the number of full assignments summed."""

    value: float
    enumerated_terms: int


def _guard(net: BeliefNetwork) -> None:
    if net.n > MAX_NODES:
        raise NetworkTooLargeError(
            f"exact enumeration refuses n = {net.n} > {MAX_NODES} nodes")


def _joint_chunk(net: BeliefNetwork, start: int, stop: int) -> np.ndarray:
    """Joint probabilities of states ``start <= s < stop``.

    State s assigns node i the bit ``(s >> (n - 1 - i)) & 1``.
    """
    n = net.n
    states = np.arange(start, stop, dtype=np.int64)
    joint = np.ones(states.shape[0], dtype=np.float64)
    for i, cpt in enumerate(net.cpts):
        bits = (states >> (n - 1 - i)) & 1
        if cpt.parents:
            row_index = np.zeros(states.shape[0], dtype=np.int64)
            for parent in cpt.parents:
                j = net.index(parent)
                row_index = (row_index << 1) | ((states >> (n - 1 - j)) & 1)
            p_one = np.asarray(cpt.rows, dtype=np.float64)[row_index]
        else:
            p_one = cpt.rows[0]
        joint *= np.where(bits == 1, p_one, 1.0 - p_one)
    return joint


@lru_cache(maxsize=64)
def _joint_table(net: BeliefNetwork) -> np.ndarray:
    table = _joint_chunk(net, 0, 1 << net.n)
    table.setflags(write=False)
    return table


def _masked_sum(net: BeliefNetwork, partial: Assignment) -> float:
    """Sum of the joint over all completions of ``partial``."""
    n = net.n
    pairs = [(net.index(node), value) for node, value in partial.items()]

    def chunk_sum(states: np.ndarray, joint: np.ndarray) -> float:
        mask = np.ones(states.shape[0], dtype=bool)
        for i, value in pairs:
            mask &= ((states >> (n - 1 - i)) & 1) == value
        return float(joint[mask].sum())

    if n <= _TABLE_MAX_NODES:
        states = np.arange(1 << n, dtype=np.int64)
        return chunk_sum(states, _joint_table(net))
    total = 0.0
    for start in range(0, 1 << n, _CHUNK):
        stop = min(start + _CHUNK, 1 << n)
        total += chunk_sum(np.arange(start, stop, dtype=np.int64),
                           _joint_chunk(net, start, stop))
    return total


def exact_marginal_result(net: BeliefNetwork,
                          partial: Assignment) -> OracleResult:
    """Exact Pr[partial] with the enumeration size attached."""
    _guard(net)
    net.validate_assignment(partial)
    value = _masked_sum(net, partial)
    return OracleResult(value, 1 << (net.n - len(partial)))


def exact_marginal(net: BeliefNetwork, partial: Assignment) -> float:
    """Exact probability that every binding in ``partial`` holds."""
    return exact_marginal_result(net, partial).value


def exact_conditional(net: BeliefNetwork, target: Assignment,
                      evidence: Assignment) -> float:
    """Exact Pr[target | evidence].

    ``target`` and ``evidence`` must bind disjoint node sets. Conditional
    probabilities are always defined because table entries are strictly
    inside (0, 1), so Pr[evidence] > 0.
    """
    _guard(net)
    overlap = set(target) & set(evidence)
    if overlap:
        raise OverlappingAssignmentsError(
            f"target and evidence both bind {sorted(overlap)}")
    merged = {**target, **evidence}
    return exact_marginal(net, merged) / exact_marginal(net, evidence)


def exact_distribution_over(net: BeliefNetwork,
                            subset: list[str] | tuple[str, ...]
                            ) -> tuple[float, ...]:
    """Exact joint distribution over every instantiation of ``subset``.

    Entry i is the marginal probability of the i-th instantiation, where i
    reads the subset values as a binary number with the first listed node
    as the most significant bit.
    """
    _guard(net)
    if len(set(subset)) != len(subset):
        raise UnknownNodeError(f"repeated node in {list(subset)}")
    for node in subset:
        net.index(node)
    if len(subset) > MAX_PROJECTION:
        raise NetworkTooLargeError(
            f"projection over {len(subset)} > {MAX_PROJECTION} nodes")
    k = len(subset)
    values = []
    for i in range(1 << k):
        instantiation = {node: (i >> (k - 1 - j)) & 1
                         for j, node in enumerate(subset)}
        values.append(exact_marginal(net, instantiation))
    return tuple(values)
