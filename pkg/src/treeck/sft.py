"""Irreducibility, aperiodicity and word counts for a transition matrix.

Matrices follow the convention of :class:`treeck.alphabet.TransitionMatrix`:
``M[b][a] = 1`` means letter ``b`` may follow letter ``a``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .groups import Check
from .validation import check_transition_matrix


@dataclass(frozen=True)
class Word:
    """A legal word ``a_0 a_1 ... a_m``."""

    letters: tuple

    def __len__(self):
        return len(self.letters)

    def is_periodic(self, p: int) -> bool:
        p = abs(p)
        return all(self.letters[j + p] == self.letters[j] for j in range(len(self.letters) - p))


def _successor_lists(M) -> list:
    n = M.shape[0]
    return [[b for b in range(n) if M[b, a]] for a in range(n)]


def _reach(adj, start) -> set:
    """Letters reachable from ``start`` by walks of at least one step."""
    seen = set(adj[start])
    queue = deque(seen)
    while queue:
        a = queue.popleft()
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return seen


def check_h2(M) -> Check:
    """Strong connectivity of the graph with an edge ``a -> b`` when ``M[b][a] = 1``.

    Walks must have at least one step, so a single letter without a loop
    fails.  On failure the witness is an ordered pair ``(a, b)`` with no
    word from ``a`` to ``b``.
    """
    M = check_transition_matrix(M)
    n = M.shape[0]
    succ = _successor_lists(M)
    pred = [[a for a in range(n) if M[b, a]] for b in range(n)]
    forward = _reach(succ, 0)
    for b in range(n):
        if b not in forward:
            return Check(False, (0, b))
    backward = _reach(pred, 0)
    for a in range(n):
        if a not in backward:
            return Check(False, (a, 0))
    return Check(True)


def is_permutation_matrix(M) -> bool:
    M = check_transition_matrix(M)
    return bool((M.sum(axis=0) == 1).all() and (M.sum(axis=1) == 1).all())


def check_h3(M) -> Check:
    """Existence, for every ``p != 0``, of a word that is not ``p``-periodic.

    Under irreducibility this holds exactly when ``M`` is not a permutation
    matrix: a permutation matrix makes the graph one cycle and every word
    periodic with the cycle length, while any letter with two successors
    yields two words of length ``p + 1`` sharing a first letter and ending
    differently, so one of them is not ``p``-periodic.

    Raises
    ------
    ValueError
        If ``M`` is not irreducible.
    """
    M = check_transition_matrix(M)
    if not check_h2(M):
        raise ValueError("aperiodicity is only decided for irreducible matrices")
    if is_permutation_matrix(M):
        return Check(False, f"permutation matrix: every word is {M.shape[0]}-periodic")
    heavy = next(a for a in range(M.shape[0]) if M[:, a].sum() >= 2)
    return Check(True, f"letter {heavy} has {int(M[:, heavy].sum())} successors")


def find_nonperiodic_witness(M, p: int, max_len: int) -> Optional[Word]:
    """A legal word of at most ``max_len`` letters that is not ``p``-periodic.

    A word fails to be ``p``-periodic iff it contains letters ``a_j != a_{j+p}``,
    i.e. a walk of ``|p|`` steps between distinct letters, so the shortest
    witness has ``|p| + 1`` letters.  Returns ``None`` when no walk of that
    kind exists or ``max_len`` is too small for it.
    """
    if p == 0:
        raise ValueError("p must be nonzero")
    M = check_transition_matrix(M)
    p = abs(p)
    if max_len < p + 1:
        return None
    n = M.shape[0]
    succ = _successor_lists(M)
    for a in range(n):
        # layered BFS keeps one parent per (step, letter)
        layer = {a: None}
        parents = [layer]
        for _ in range(p):
            nxt = {}
            for x in layer:
                for y in succ[x]:
                    nxt.setdefault(y, x)
            layer = nxt
            parents.append(layer)
        for end in sorted(layer):
            if end == a:
                continue
            word = [end]
            for step in range(p, 0, -1):
                word.append(parents[step][word[-1]])
            return Word(tuple(reversed(word)))
    return None


def count_words(M, m: int) -> int:
    """Number of legal words with ``m + 1`` letters, the entry sum of ``M^m``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    M = check_transition_matrix(M)
    n = M.shape[0]
    succ = _successor_lists(M)
    ways = [1] * n
    for _ in range(m):
        nxt = [0] * n
        for a in range(n):
            if ways[a]:
                for b in succ[a]:
                    nxt[b] += ways[a]
        ways = nxt
    return sum(ways)


def is_legal(M, letters) -> bool:
    M = check_transition_matrix(M)
    return all(M[b, a] for a, b in zip(letters, letters[1:]))
