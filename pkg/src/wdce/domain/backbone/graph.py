"""Skeleton adjacency."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from wdce.lib.exceptions import ConfigurationError

if TYPE_CHECKING:
    from collections.abc import Iterable

    from wdce.lib.types import Array

__all__ = ["SkeletonGraph", "build_graph", "chain_edges"]


@dataclass(frozen=True, slots=True)
class SkeletonGraph:
    """Joint graph with its symmetric-normalized adjacency ``D^-1/2 (A + I) D^-1/2``."""

    joints: int
    edges: tuple[tuple[int, int], ...]
    adjacency: Array

    def neighbours(self, joint: int) -> list[int]:
        """Joints sharing an edge with ``joint``, ascending."""
        return sorted({b for a, b in self.edges if a == joint} | {a for a, b in self.edges if b == joint})

    def parents(self, root: int = 0) -> list[int]:
        """Breadth-first spanning tree rooted at ``root``; the root is its own parent.

        Raises:
            ConfigurationError: If some joint is unreachable from ``root``.
        """
        parent = [-1] * self.joints
        parent[root] = root
        queue = deque([root])
        while queue:
            joint = queue.popleft()
            for other in self.neighbours(joint):
                if parent[other] < 0:
                    parent[other] = joint
                    queue.append(other)
        unreachable = [joint for joint, p in enumerate(parent) if p < 0]
        if unreachable:
            msg = f"skeleton graph is disconnected: joints {unreachable} unreachable from {root}"
            raise ConfigurationError(msg)
        return parent


def chain_edges(joints: int) -> tuple[tuple[int, int], ...]:
    """Edges of the path ``0-1-...-(joints-1)``."""
    return tuple((joint, joint + 1) for joint in range(joints - 1))


def build_graph(edges: Iterable[tuple[int, int]], joints: int) -> SkeletonGraph:
    """Validate ``edges`` and normalize the adjacency with self-loops.

    Args:
        edges: Undirected joint pairs.
        joints: Joint count ``V``.

    Returns:
        The skeleton graph.

    Raises:
        ConfigurationError: On out-of-range endpoints, self-loops or duplicate edges.
    """
    if joints < 1:
        msg = f"a skeleton needs at least one joint, got {joints}"
        raise ConfigurationError(msg)
    seen: set[tuple[int, int]] = set()
    ordered: list[tuple[int, int]] = []
    for a, b in edges:
        a, b = int(a), int(b)
        if not (0 <= a < joints and 0 <= b < joints):
            msg = f"edge ({a}, {b}) has an endpoint outside [0, {joints})"
            raise ConfigurationError(msg)
        if a == b:
            msg = f"edge ({a}, {b}) is a self-loop; self-loops are added by normalization"
            raise ConfigurationError(msg)
        key = (min(a, b), max(a, b))
        if key in seen:
            msg = f"duplicate edge ({a}, {b})"
            raise ConfigurationError(msg)
        seen.add(key)
        ordered.append((a, b))

    adjacency = np.eye(joints)
    for a, b in ordered:
        adjacency[a, b] = adjacency[b, a] = 1.0
    scale = 1.0 / np.sqrt(adjacency.sum(axis=1))
    normalized = scale[:, None] * adjacency * scale[None, :]
    normalized.setflags(write=False)
    return SkeletonGraph(joints=joints, edges=tuple(ordered), adjacency=normalized)
