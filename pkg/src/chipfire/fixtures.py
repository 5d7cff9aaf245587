"""Bundled example games used by the CLI and the test suite.

Names follow the figure numbering of the source material the corpus was
transcribed from. Each factory returns a fresh immutable game; the
registry maps fixture names to factories.
"""

from __future__ import annotations

from typing import Callable

from .model import Game, asm, cfg, mcfg


def fig2() -> Game:
    """Four-vertex funnel: two feeders into a middle vertex that drains
    into the sink along a double edge."""
    return cfg(
        {"a": 1, "b": 1, "c": 1, "d": 0},
        [("a", "c"), ("b", "c"), ("c", "d", 2)],
        sink="d",
    )


def fig3() -> Game:
    """Three-vertex mutating game on a cycle.

    The documented prefix fires a, b, c once each, with the mutations
    rewiring a to c and b to a. The schedules here continue with empty
    entries so every vertex dies after its second firing, which makes
    the game convergent (it is not simple: each vertex fires twice).
    """
    return mcfg(
        {"a": 1, "b": 0, "c": 3},
        [("a", "b"), ("b", "c"), ("c", "a"), ("c", "b")],
        {"a": [["c"], []], "b": [["a"], []], "c": [["a", "b"], []]},
    )


def fig5() -> Game:
    """Two-vertex mutating game whose lower vertex ends an execution with
    more chips than its initial outdegree."""
    return mcfg(
        {"a": 3, "b": 0, "bot": 0},
        [("a", "b", 3), ("b", "bot")],
        {"a": [["b"]], "b": [["bot", "bot", "bot"]]},
        sink="bot",
    )


def fig5_cfg() -> Game:
    """The equivalent plain game obtained from fig5 by the rewrite that
    tops up the lower vertex and grounds its surplus."""
    return cfg(
        {"a": 3, "b": 2, "bot": 0},
        [("a", "b", 3), ("b", "bot", 3)],
        sink="bot",
    )


def fig6_1() -> Game:
    """Two-vertex chain: the base game of the edge-reversal walkthrough."""
    return cfg(
        {"v": 1, "u": 0, "bot": 0},
        [("v", "u"), ("u", "bot")],
        sink="bot",
    )


def fig6_2() -> Game:
    """fig6_1 plus a bare reverse edge (u, v); u can no longer fire."""
    return cfg(
        {"v": 1, "u": 0, "bot": 0},
        [("v", "u"), ("u", "v"), ("u", "bot")],
        sink="bot",
    )


def fig6_3() -> Game:
    """fig6_2 plus a compensating chip on u; now v fires twice."""
    return cfg(
        {"v": 1, "u": 1, "bot": 0},
        [("v", "u"), ("u", "v"), ("u", "bot")],
        sink="bot",
    )


def fig6_4() -> Game:
    """fig6_3 with v grounded once; equivalent to fig6_1 again."""
    return cfg(
        {"v": 2, "u": 1, "bot": 0},
        [("v", "u"), ("v", "bot"), ("u", "v"), ("u", "bot")],
        sink="bot",
    )


def fig7_cfg() -> Game:
    """A game with a two-cycle between c and d that is nevertheless
    equivalent to a sandpile."""
    return cfg(
        {"a": 1, "b": 1, "c": 1, "d": 1, "bot": 0},
        [("a", "c"), ("b", "d"), ("c", "d"), ("d", "c"),
         ("c", "bot"), ("d", "bot")],
        sink="bot",
    )


def fig7_asm() -> Game:
    """The sandpile equivalent of fig7_cfg."""
    return asm(
        {"a": 2, "b": 2, "c": 2, "d": 2, "bot": 0},
        [("a", "c"), ("b", "d"), ("c", "d"),
         ("a", "bot"), ("b", "bot"), ("c", "bot"), ("d", "bot")],
        sink="bot",
    )


def fig9() -> Game:
    """Six-vertex game with a directed 3-cycle among the primed vertices.

    Its configuration space cannot be produced by any sandpile; the edge
    asymmetries d(b',a') > d(c',a') and rotations witness that.
    """
    return cfg(
        {"a": 1, "b": 1, "c": 1, "a'": 1, "b'": 1, "c'": 1, "bot": 0},
        [("a", "a'"), ("b", "b'"), ("c", "c'"),
         ("a'", "c'"), ("b'", "a'"), ("c'", "b'"),
         ("a'", "bot"), ("b'", "bot"), ("c'", "bot")],
        sink="bot",
    )


FIXTURES: dict[str, Callable[[], Game]] = {
    "fig2": fig2,
    "fig3": fig3,
    "fig5": fig5,
    "fig5-cfg": fig5_cfg,
    "fig6-1": fig6_1,
    "fig6-2": fig6_2,
    "fig6-3": fig6_3,
    "fig6-4": fig6_4,
    "fig7-cfg": fig7_cfg,
    "fig7-asm": fig7_asm,
    "fig9": fig9,
}


def get(name: str) -> Game:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; try one of {sorted(FIXTURES)}")
