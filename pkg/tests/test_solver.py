"""Exact decision-game solver tests on hand-solved micro fixtures."""
import random

import pytest

from areaguard.model import (
    AdjacencyGraph,
    Configuration,
    Instance,
    Team,
    TeamMove,
    apply_team_move,
    attacker,
    defender,
)
from areaguard.qbf import parse_qdimacs, reduce_to_instance
from areaguard.solver import (
    BudgetExceeded,
    enumerate_team_moves,
    solve_decision_game,
    state_space_bound,
)
from helpers import grid_from_rows


def grid_instance(rows, attackers, targets, defenders):
    return Instance(
        world=grid_from_rows(rows),
        attacker_starts=tuple(attackers),
        attacker_targets=tuple(targets),
        defender_starts=tuple(defenders),
        time_limit=1,
    )


def branch_instance(defender_at: str) -> Instance:
    # A five-vertex corridor with a four-vertex stem hanging off the far
    # end. The attacker needs four moves; a defender k steps up the stem
    # seals the corridor end with its k-th move.
    nodes = ["v0", "v1", "v2", "v3", "v4", "b1", "b2", "b3", "b4"]
    edges = [("v0", "v1"), ("v1", "v2"), ("v2", "v3"), ("v3", "v4"),
             ("v4", "b1"), ("b1", "b2"), ("b2", "b3"), ("b3", "b4")]
    return Instance(
        world=AdjacencyGraph.from_edges(nodes, edges),
        attacker_starts=("v0",),
        attacker_targets=("v4",),
        defender_starts=(defender_at,),
        time_limit=1,
    )


def test_unopposed_attacker_wins():
    inst = grid_instance(["..."], [(0, 0)], [(2, 0)], [])
    assert solve_decision_game(inst).winner is Team.ATTACKERS


def test_defender_on_target_wins():
    inst = grid_instance(["..."], [(0, 0)], [(2, 0)], [(2, 0)])
    assert solve_decision_game(inst).winner is Team.DEFENDERS


def test_defender_two_hops_up_the_stem_wins():
    assert solve_decision_game(branch_instance("b2")).winner is Team.DEFENDERS


def test_defender_four_hops_up_the_stem_loses():
    # The attacker's fourth move lands before the defender's fourth.
    assert solve_decision_game(branch_instance("b4")).winner is Team.ATTACKERS


def test_defender_parked_mid_corridor_wins():
    inst = grid_instance(["..."], [(0, 0)], [(2, 0)], [(1, 0)])
    assert solve_decision_game(inst).winner is Team.DEFENDERS


def test_adjacent_attacker_captures_before_any_defense():
    inst = grid_instance(["..."], [(0, 0)], [(1, 0)], [(2, 0)])
    assert solve_decision_game(inst).winner is Team.ATTACKERS


def test_one_defender_cannot_cover_two_targets():
    inst = grid_instance(
        ["...", "...", "..."],
        [(0, 0), (0, 2)],
        [(2, 0), (2, 2)],
        [(2, 1)],
    )
    assert solve_decision_game(inst).winner is Team.ATTACKERS


def test_two_defenders_cover_both_targets():
    inst = grid_instance(
        ["...", "...", "..."],
        [(0, 0), (0, 2)],
        [(2, 0), (2, 2)],
        [(2, 0), (2, 2)],
    )
    assert solve_decision_game(inst).winner is Team.DEFENDERS


def test_attacker_starting_on_target_wins_immediately():
    inst = grid_instance(["..", ".."], [(0, 0)], [(0, 0)], [(1, 1)])
    result = solve_decision_game(inst)
    assert result.winner is Team.ATTACKERS
    assert result.states == 1


def test_budget_refusal():
    rows = ["." * 10] * 10
    inst = grid_instance(rows, [(0, 0), (1, 0)], [(9, 9), (8, 9)], [(0, 9), (9, 0)])
    assert state_space_bound(inst) == 2 * 100 * 99 * 98 * 97
    with pytest.raises(BudgetExceeded):
        solve_decision_game(inst)


def test_reduced_formula_is_politely_refused():
    inst = reduce_to_instance(
        parse_qdimacs("p cnf 2 1\ne 1 0\na 2 0\n1 -2 0\n")
    )
    with pytest.raises(BudgetExceeded):
        solve_decision_game(inst)


def test_solver_deterministic():
    inst = branch_instance("b3")
    a = solve_decision_game(inst)
    b = solve_decision_game(inst)
    assert a == b
    assert a.winner is Team.DEFENDERS


def test_enumerated_moves_match_movement_kernel():
    # Every joint move the solver enumerates must be granted verbatim by
    # the shared movement kernel, and every fully granted kernel outcome
    # must be in the enumerated set.
    rng = random.Random(991)
    for _ in range(60):
        while True:
            rows = [
                "".join("@" if rng.random() < 0.2 else "." for _ in range(4))
                for _ in range(3)
            ]
            grid = grid_from_rows(rows)
            cells = list(grid.passable_cells())
            if len(cells) >= 5:
                break
        spots = rng.sample(cells, 5)
        own = tuple(spots[:3])
        frozen = frozenset(spots[3:])
        config = Configuration(
            positions={
                **{attacker(i): c for i, c in enumerate(own)},
                **{defender(j): c for j, c in enumerate(spots[3:])},
            }
        )
        legal = set(enumerate_team_moves(grid, own, frozen))
        for joint in legal:
            move = TeamMove(Team.ATTACKERS, {attacker(i): joint[i] for i in range(3)})
            after = apply_team_move(grid, config, move)
            assert tuple(after.positions[attacker(i)] for i in range(3)) == joint
            for j, c in enumerate(spots[3:]):
                assert after.positions[defender(j)] == c
        for _ in range(20):
            desired = {}
            for i in range(3):
                options = [own[i]] + grid.neighbors(own[i])
                desired[attacker(i)] = rng.choice(options)
            after = apply_team_move(grid, config, TeamMove(Team.ATTACKERS, desired))
            got = tuple(after.positions[attacker(i)] for i in range(3))
            fully_granted = all(
                after.positions[a] == desired[a] for a in desired
            )
            if fully_granted:
                assert got in legal
