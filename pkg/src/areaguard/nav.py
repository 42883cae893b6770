"""Per-agent route planning with local repair.

Each agent keeps a private shortest-path plan toward its goal and follows
it head-first. When the next planned cell is occupied the agent replans
immediately, treating every currently occupied cell (both teams) as
blocked; if no route exists it waits and keeps the stale plan in the hope
that the blocker leaves. Conflict-resolution denials are reported back via
observe_result; after STALL_REPLAN_THRESHOLD consecutive stalls with a
live plan the agent throws the plan away and replans from scratch, which
bounds convoy livelocks. An agent whose goal is None (or already reached)
simply holds its cell.
"""
from __future__ import annotations

from dataclasses import dataclass

from areaguard.grid import Cell, GridMap, find_path, shortest_path
from areaguard.model import AgentId, Configuration

STALL_REPLAN_THRESHOLD = 3


@dataclass(frozen=True)
class NavState:
    """Routing memory of one agent between steps."""

    agent: AgentId
    goal: Cell | None
    plan: tuple[Cell, ...] = ()
    stalls: int = 0


def next_move(
    nav: NavState,
    config: Configuration,
    grid: GridMap,
    stall_replan_threshold: int = STALL_REPLAN_THRESHOLD,
    occupied: set[Cell] | None = None,
    fail_memo: list[set[int]] | None = None,
) -> tuple[Cell, NavState]:
    """Propose the agent's next cell and return its updated state.

    The proposal is always legal in isolation: the current cell, or an
    adjacent passable cell that was unoccupied when proposed. Voluntary
    waits (no goal, at goal, no route) are counted in the returned state's
    stall counter; denied moves are counted later by observe_result.

    Callers stepping a whole team may pass the phase's occupied-cell set to
    avoid rebuilding it per agent; it is read, never mutated. The agent's
    own cell may stay in it: plan heads are never the current cell and the
    path search ignores its source as an obstacle. Such callers may also
    pass fail_memo, a list shared by all calls made against one occupied
    snapshot; it accumulates failed-search regions so hopeless replans in a
    crowded phase are answered without repeating the flood.
    """
    here = config.positions[nav.agent]
    if nav.goal is None or here == nav.goal:
        if nav.plan or nav.stalls:
            nav = NavState(nav.agent, nav.goal)
        return here, nav

    plan = nav.plan
    forced = plan and nav.stalls >= stall_replan_threshold
    if forced:
        plan = ()

    if occupied is None:
        occupied = config.occupied_cells()
        occupied.discard(here)
    if plan and plan[0] not in occupied:
        if forced is False and plan is nav.plan:
            return plan[0], nav
        return plan[0], NavState(nav.agent, nav.goal, plan, nav.stalls)

    if fail_memo is None:
        path = shortest_path(grid, here, nav.goal, forbidden=occupied)
    else:
        path = _search_with_memo(grid, here, nav.goal, occupied, fail_memo)
    if path is None:
        # Keep whatever plan we had; the blocker may move next step.
        return here, NavState(nav.agent, nav.goal, nav.plan, nav.stalls + 1)
    new_plan = tuple(path[1:])
    return new_plan[0], NavState(nav.agent, nav.goal, new_plan)


def _search_with_memo(
    grid: GridMap,
    src: Cell,
    dst: Cell,
    occupied: set[Cell],
    memo: list[set[int]],
) -> list[Cell] | None:
    """Path search that reuses failed-search regions.

    A failed search proves its whole flooded region is sealed off from
    everything outside it. A later query against the same occupied snapshot
    whose source lies in that region (or whose source cell is occupied but
    walled in by it) can therefore only succeed if its destination is inside
    too; when it is not, the flood is skipped. The answer is exactly what
    the full search would return, just cheaper.
    """
    si = grid.index(src)
    di = grid.index(dst)
    nbrs: list[tuple[Cell, int]] | None = None
    for region in memo:
        if si not in region:
            # An occupied source is boxed in by the region only if every
            # passable neighbor is occupied or belongs to it.
            if nbrs is None:
                nbrs = [(nb, grid.index(nb)) for nb in grid.neighbors(src)]
            if any(nb not in occupied and ni not in region for nb, ni in nbrs):
                continue
        if di in region:
            break
        return None
    path, region = find_path(grid, src, dst, occupied)
    if path is None and region is not None:
        memo.append(region)
    return path


def observe_result(nav: NavState, proposed: Cell, before: Cell, after: Cell) -> NavState:
    """Fold the outcome of a team phase back into the agent's state."""
    if after != before:
        if nav.plan and nav.plan[0] == after:
            return NavState(nav.agent, nav.goal, nav.plan[1:])
        # Desynchronized plan (should not happen): drop it and replan later.
        return NavState(nav.agent, nav.goal)
    if proposed != before:
        # The move was denied by conflict resolution.
        return NavState(nav.agent, nav.goal, nav.plan, nav.stalls + 1)
    return nav
