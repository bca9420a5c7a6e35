"""Canonical representatives of alphabet matrices under the search symmetry group.

An alphabet matrix (entries in ``{0, ±z_1, ..., ±z_l}``) is encoded on its
row-major upper triangle as two tuples:

* ``labels[p]`` in ``0..l`` (0 for a zero entry, ``v+1`` for ``±z_{v+1}``),
* ``signs[p]`` in ``{0, 1}`` (1 for a minus sign, always 0 on zero entries).

The group acting is generated by simultaneous row/column permutations,
permutations of the variables, sign flips ``z_v -> -z_v`` and conjugation by
diagonal ``±1`` matrices.  None of these changes whether the determinant is a
definite form.  The canonical form is the representative minimizing the key
``labels + signs`` lexicographically.

For a fixed row permutation the best variable relabeling is "order of first
appearance", so only ``size!`` permutations are scanned.  The sign part is an
affine action of ``GF(2)^(l + size)``, minimized greedily position by
position.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from itertools import permutations
from typing import Sequence

from ..errors import ContractError
from ..poly import LinearForm
from .symbolic import SymbolicMatrix


@lru_cache(maxsize=None)
def upper_positions(k: int) -> tuple:
    return tuple((i, j) for i in range(k) for j in range(i, k))


@lru_cache(maxsize=None)
def position_index(k: int) -> dict:
    idx = {}
    for p, (i, j) in enumerate(upper_positions(k)):
        idx[(i, j)] = idx[(j, i)] = p
    return idx


@lru_cache(maxsize=None)
def permutation_maps(k: int) -> tuple:
    """For each row permutation, the induced map new position -> old position."""
    pos = upper_positions(k)
    idx = position_index(k)
    out = []
    for sigma in permutations(range(k)):
        out.append((sigma, tuple(idx[(sigma[i], sigma[j])] for i, j in pos)))
    return tuple(out)


def encode(M: SymbolicMatrix) -> tuple[tuple, tuple]:
    labels, signs = [], []
    for f in M.upper():
        code = f.alphabet_code()
        if code is None:
            labels.append(0)
            signs.append(0)
        else:
            v, s = code
            labels.append(v + 1)
            signs.append(1 if s < 0 else 0)
    return tuple(labels), tuple(signs)


def decode(k: int, l: int, labels: Sequence[int], signs: Sequence[int]) -> SymbolicMatrix:
    upper = []
    for lab, sg in zip(labels, signs):
        if lab == 0:
            upper.append(LinearForm.zero(l))
        else:
            upper.append(LinearForm.unit(l, lab - 1, -1 if sg else 1))
    return SymbolicMatrix.from_upper(l, k, upper)


def relabel_first_appearance(seq: Sequence[int], l: int) -> tuple[tuple, tuple]:
    """Rename variables in order of first appearance.

    Returns the relabeled sequence and the map ``old label -> new label``
    (index 0 unused); absent variables take the remaining labels in order.
    """
    mapping = [0] * (l + 1)
    nxt = 1
    for x in seq:
        if x and not mapping[x]:
            mapping[x] = nxt
            nxt += 1
    for v in range(1, l + 1):
        if not mapping[v]:
            mapping[v] = nxt
            nxt += 1
    return tuple(mapping[x] for x in seq), tuple(mapping)


def label_orbit_min(k: int, l: int, labels: Sequence[int]) -> tuple[tuple, list]:
    """Minimal label sequence over row and variable permutations.

    Returns the minimum and every ``(position map, variable map)`` achieving it.
    """
    best = None
    ties: list = []
    for _, pmap in permutation_maps(k):
        seq = [labels[q] for q in pmap]
        new, vmap = relabel_first_appearance(seq, l)
        if best is None or new < best:
            best, ties = new, [(pmap, vmap)]
        elif new == best:
            ties.append((pmap, vmap))
    return best, ties


def minimize_signs(k: int, l: int, pmap: Sequence[int], new_labels: Sequence[int],
                   old_signs: Sequence[int]) -> tuple:
    """Lexicographically least sign vector in the sign-group orbit.

    Unknowns are bits ``0..l-1`` (variable flips) and ``l..l+k-1`` (diagonal
    conjugation); an entry's sign bit changes by ``eps_v + d_i + d_j``.
    """
    pos = upper_positions(k)
    basis: dict[int, tuple[int, int]] = {}
    out = []
    for p, (i, j) in enumerate(pos):
        lab = new_labels[p]
        if lab == 0:
            out.append(0)
            continue
        c = old_signs[pmap[p]]
        mask = 1 << (lab - 1)
        if i != j:
            mask ^= (1 << (l + i)) ^ (1 << (l + j))
        acc = 0
        while mask:
            top = mask.bit_length() - 1
            hit = basis.get(top)
            if hit is None:
                break
            mask ^= hit[0]
            acc ^= hit[1]
        if mask:
            basis[mask.bit_length() - 1] = (mask, c ^ acc)
            out.append(0)
        else:
            out.append(c ^ acc)
    return tuple(out)


def sign_pivots(k: int, l: int, labels: Sequence[int]) -> tuple[list, list]:
    """Split the nonzero positions into pivot and free positions.

    Sign vectors that vanish on the pivot positions are exactly the fixed
    points of :func:`minimize_signs` for the identity permutation, one per
    orbit of the sign group.
    """
    pos = upper_positions(k)
    basis: dict[int, int] = {}
    pivots, free = [], []
    for p, (i, j) in enumerate(pos):
        lab = labels[p]
        if lab == 0:
            continue
        mask = 1 << (lab - 1)
        if i != j:
            mask ^= (1 << (l + i)) ^ (1 << (l + j))
        while mask and (mask.bit_length() - 1) in basis:
            mask ^= basis[mask.bit_length() - 1]
        if mask:
            basis[mask.bit_length() - 1] = mask
            pivots.append(p)
        else:
            free.append(p)
    return pivots, free


def canonical_key_codes(k: int, l: int, labels: Sequence[int], signs: Sequence[int],
                        ties: list | None = None) -> tuple:
    if ties is None:
        best, ties = label_orbit_min(k, l, labels)
    else:
        best = None
    best_key = None
    for pmap, vmap in ties:
        new_labels = tuple(vmap[labels[q]] for q in pmap)
        s = minimize_signs(k, l, pmap, new_labels, signs)
        key = new_labels + s
        if best_key is None or key < best_key:
            best_key = key
    return best_key


def canonical_key(M: SymbolicMatrix) -> tuple:
    labels, signs = encode(M)
    return canonical_key_codes(M.size, M.l, labels, signs)


def key_to_matrix(k: int, l: int, key: Sequence[int]) -> SymbolicMatrix:
    m = len(key) // 2
    return decode(k, l, key[:m], key[m:])


def canonical_form(M: SymbolicMatrix) -> SymbolicMatrix:
    if not M.is_alphabet():
        raise ContractError("canonical_form needs entries in {0, ±z_v}")
    return key_to_matrix(M.size, M.l, canonical_key(M))


def key_id(k: int, l: int, key: Sequence[int]) -> str:
    text = f"{l}:{k}:" + ",".join(map(str, key))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def canonical_id(M: SymbolicMatrix) -> str:
    if not M.is_alphabet():
        raise ContractError("canonical_id needs entries in {0, ±z_v}")
    return key_id(M.size, M.l, canonical_key(M))


def raw_id(M: SymbolicMatrix) -> str:
    """Stable id for matrices outside the alphabet (no symmetry reduction)."""
    text = f"raw:{M.l}:" + ";".join(f.format() for f in M.upper())
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def act(M: SymbolicMatrix, sigma: Sequence[int], pi: Sequence[int],
        var_signs: Sequence[int], diag_signs: Sequence[int]) -> SymbolicMatrix:
    """Apply one group element to an arbitrary symbolic matrix.

    ``new[i][j] = d_i d_j * old[sigma[i]][sigma[j]]`` with ``z_v`` replaced by
    ``var_signs[v] * z_{pi[v]}``.
    """
    k, l = M.size, M.l

    def tr(f: LinearForm) -> LinearForm:
        out = [0] * l
        for v, c in enumerate(f.coeffs):
            out[pi[v]] += c * var_signs[v]
        return LinearForm(out)

    rows = []
    for i in range(k):
        row = []
        for j in range(k):
            f = tr(M.entries[sigma[i]][sigma[j]])
            row.append(f * (diag_signs[i] * diag_signs[j]))
        rows.append(tuple(row))
    return SymbolicMatrix(l, tuple(rows))
