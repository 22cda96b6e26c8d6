"""Hopf morphisms from the forest algebra into tensor algebras.

phi_g flattens a forest into shuffles of its vertex words (the geometric
side's view of a tree); psi cuts a tree apart into words whose letters are
the cut pieces, keeping the tree itself as the single-letter word.  Both are
algebra morphisms for the shuffle product and coproduct morphisms onto
deconcatenation, which is what verify_hopf_morphism checks exhaustively.

The adjoints pull tensor functionals back to forest functionals; they turn
concatenation into the convolution product.
"""

from __future__ import annotations

import functools
from fractions import Fraction

from .hopf import HElem, _forest_coproduct, _tree_coproduct
from .tensor import (
    EMPTY_WORD,
    TensorElem,
    Word,
    _shuffle_words,
    deconcat,
)
from .trees import (
    EMPTY_FOREST,
    Forest,
    Tree,
    chain,
    enumerate_forests,
    enumerate_trees,
    forests_of_grade,
)

_ZERO = Fraction(0)


def _shuffle_dict(a: dict, b: dict) -> dict:
    out: dict = {}
    for w1, c1 in a.items():
        for w2, c2 in b.items():
            for letters, cnt in _shuffle_words(w1.letters, w2.letters):
                w = Word(letters)
                out[w] = out.get(w, _ZERO) + cnt * c1 * c2
    return out


_UNIT_DICT = {EMPTY_WORD: Fraction(1)}


@functools.lru_cache(maxsize=None)
def _phi_tree(t: Tree) -> tuple:
    """phi_g(t) as ((word, coeff), ...): child shuffles with the root letter
    appended, so a tree of grade n maps to words of n single-vertex letters."""
    acc = _UNIT_DICT
    for c in t.children:
        acc = _shuffle_dict(acc, dict(_phi_tree(c)))
    root = Tree(t.label)
    out = {Word(w.letters + (root,)): v for w, v in acc.items()}
    return tuple(out.items())


def _phi_forest(f: Forest) -> dict:
    acc = _UNIT_DICT
    for t in f.factors:
        acc = _shuffle_dict(acc, dict(_phi_tree(t)))
    return acc


def phi_g(h: HElem) -> TensorElem:
    """Morphism onto words of single-vertex letters: [h]_i appends e_i,
    products shuffle."""
    out: dict = {}
    for f, c in h.terms.items():
        for w, v in _phi_forest(f).items():
            out[w] = out.get(w, _ZERO) + c * v
    return TensorElem(out, h.d, 1)


@functools.lru_cache(maxsize=None)
def _psi_tree(t: Tree) -> tuple:
    """psi(t) as ((word, coeff), ...).

    psi(t) = t (one-letter word) plus, for every nontrivial cut
    pruned (x) trunk with its multiplicity, psi(pruned) with the trunk
    appended as a single letter.  The trunk of a tree cut is always a tree.
    """
    whole = Forest((t,))
    out: dict = {Word((t,)): Fraction(1)}
    for left, right, cnt in _tree_coproduct(t):
        if left == whole or left.is_unit():
            continue
        trunk = right.factors[0]
        for w, v in _psi_forest(left).items():
            key = Word(w.letters + (trunk,))
            out[key] = out.get(key, _ZERO) + cnt * v
    return tuple(out.items())


def _psi_forest(f: Forest) -> dict:
    acc = _UNIT_DICT
    for t in f.factors:
        acc = _shuffle_dict(acc, dict(_psi_tree(t)))
    return acc


def psi(h: HElem, N: int) -> TensorElem:
    """Morphism onto words of tree letters; a tree maps to itself plus words
    of strictly smaller-grade letters."""
    if h.max_grade() > N:
        raise ValueError(f"grade {h.max_grade()} exceeds truncation level {N}")
    out: dict = {}
    for f, c in h.terms.items():
        for w, v in _psi_forest(f).items():
            out[w] = out.get(w, _ZERO) + c * v
    return TensorElem(out, h.d, max(N, 1))


# -- adjoints --------------------------------------------------------------


def psi_adjoint(w: Word, N: int, d: int | None = None) -> HElem:
    """<psi*(w), h> = <w, psi(h)> over forests h of grade <= N."""
    if d is None:
        d = max(w.max_label(), 1)
    out: dict = {}
    if w.is_empty():
        out[EMPTY_FOREST] = Fraction(1)
    elif w.grade <= N:
        # psi is graded, so only forests of the word's grade can hit it
        for h in forests_of_grade(w.grade, d):
            c = _psi_forest(h).get(w)
            if c:
                out[h] = c
    return HElem(out, d)


def phi_g_adjoint(w: Word, d: int | None = None) -> HElem:
    """<phi_g*(w), h> = <w, phi_g(h)>, over forests of the word's grade."""
    if w.max_letter_grade() > 1:
        raise ValueError("phi_g_adjoint needs single-vertex letters")
    if d is None:
        d = max(w.max_label(), 1)
    out: dict = {}
    if w.is_empty():
        out[EMPTY_FOREST] = Fraction(1)
    else:
        for h in forests_of_grade(w.grade, d):
            c = _phi_forest(h).get(w)
            if c:
                out[h] = c
    return HElem(out, d)


# -- chain embedding -------------------------------------------------------


def iota(w: Word) -> Tree:
    """Word of single-vertex letters to the linear chain tree: first letter
    at the leaf end, last letter at the root."""
    if w.is_empty():
        raise ValueError("empty word has no chain tree")
    if w.max_letter_grade() > 1:
        raise ValueError("iota needs single-vertex letters")
    return chain(t.label for t in w.letters)


def iota_elem(x: TensorElem) -> HElem:
    """Linear extension of iota; the empty word maps to the empty forest."""
    out: dict = {}
    for w, c in x.terms.items():
        f = EMPTY_FOREST if w.is_empty() else Forest((iota(w),))
        out[f] = out.get(f, _ZERO) + c
    return HElem(out, x.d)


# -- morphism table and verification ---------------------------------------


class MorphismTable:
    """Per-tree images of one morphism, built once for grade <= N, labels
    <= d, then read-only."""

    __slots__ = ("which", "N", "d", "cache")

    def __init__(self, which: str, N: int, d: int):
        if which not in ("phi_g", "psi"):
            raise ValueError(f"unknown morphism {which!r}")
        self.which = which
        self.N = N
        self.d = d
        n = 1 if which == "phi_g" else max(N, 1)
        fn = _phi_tree if which == "phi_g" else _psi_tree
        self.cache = {
            t: TensorElem(dict(fn(t)), d, n) for t in enumerate_trees(N, d)
        }

    def letter_bound(self) -> int:
        return 1 if self.which == "phi_g" else max(self.N, 1)

    def image(self, f: Forest) -> TensorElem:
        """Morphism value on a basis forest: shuffle over the factors."""
        n = self.letter_bound()
        acc = TensorElem.unit(self.d, n)
        for t in f.factors:
            entry = self.cache.get(t)
            if entry is None:
                raise ValueError(f"tree {t!r} outside table level {self.N}")
            acc = _shuffle_elems(acc, entry)
        return acc

    def image_elem(self, x: HElem) -> TensorElem:
        n = self.letter_bound()
        out = TensorElem.zero(self.d, n)
        for f, c in x.terms.items():
            out = out + self.image(f).scale(c)
        return out


def _shuffle_elems(a: TensorElem, b: TensorElem) -> TensorElem:
    return TensorElem(_shuffle_dict(a.terms, b.terms), a.d, a.n)


def verify_hopf_morphism(which: str, N: int, d: int, table: MorphismTable | None = None) -> dict:
    """Exhaustive morphism check on all forests of grade <= N.

    Product check: image(h1 h2) = image(h1) shuffled with image(h2).
    Coproduct check: deconcat(image(h)) = (image (x) image)(cut coproduct h).
    Returns a report with the first counterexample if any.
    """
    if table is None:
        table = MorphismTable(which, N, d)
    report = {
        "which": which,
        "N": N,
        "d": d,
        "status": "pass",
        "checked_forests": 0,
        "checked_pairs": 0,
        "witness": None,
    }
    forests = enumerate_forests(N, d)
    for h in forests:
        img = table.image(h)
        lhs = deconcat(img).terms
        rhs: dict = {}
        for a, b, cnt in _forest_coproduct(h):
            ia = table.image(a)
            ib = table.image(b)
            for wa, ca in ia.terms.items():
                for wb, cb in ib.terms.items():
                    key = (wa, wb)
                    rhs[key] = rhs.get(key, _ZERO) + cnt * ca * cb
        rhs = {k: v for k, v in rhs.items() if v != 0}
        if lhs != rhs:
            report["status"] = "fail"
            report["witness"] = f"coproduct morphism fails on {h!r}"
            return report
        report["checked_forests"] += 1
    for h1 in forests:
        if h1.is_unit():
            continue
        for h2 in forests:
            if h2.is_unit() or h1.grade + h2.grade > N:
                continue
            if _shuffle_elems(table.image(h1), table.image(h2)) != table.image(h1 * h2):
                report["status"] = "fail"
                report["witness"] = f"product morphism fails on {h1!r}, {h2!r}"
                return report
            report["checked_pairs"] += 1
    return report
