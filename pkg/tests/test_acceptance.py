"""Acceptance gates, one test per gate.

Every identity here is exact rational (or exact dyadic float) equality;
the two quantitative gates pin their tolerance windows inline.  Each test
asserts its own wall-clock budget, so a pass line certifies both the
mathematics and the cost.
"""

import math
import time
from contextlib import contextmanager
from fractions import Fraction
from random import Random

from hopfpath.conversion import encode, simplify_n2
from hopfpath.expr import ParseError, parse_h, parse_tensor, print_h, print_tensor
from hopfpath.hopf import (
    HElem,
    antipode,
    convolve,
    coproduct,
    counit,
    exp_star,
    is_group_like,
    is_primitive,
    log_star,
    pair,
    product,
)
from hopfpath.morphisms import psi, verify_hopf_morphism
from hopfpath.rde import (
    ButcherTable,
    PolyVectorField,
    check_lgl,
    convert_rde,
    solve_branched,
    solve_geometric,
)
from hopfpath.roughpath import (
    FLOAT,
    RATIONAL,
    SampledPath,
    canonical_lift,
    embed_geometric,
    geometricity_report,
    ibp_defect,
    ito_lift,
    validate,
)
from hopfpath.tensor import TensorElem, enumerate_words
from hopfpath.trees import Forest, enumerate_forests, enumerate_trees, graft, leaf

from oracles import forest_coproduct_oracle


@contextmanager
def budget(seconds):
    t0 = time.monotonic()
    yield
    elapsed = time.monotonic() - t0
    assert elapsed < seconds, f"took {elapsed:.1f}s, budget {seconds}s"


def _walk(seed: int, d: int, M: int, step: Fraction) -> SampledPath:
    """Seeded +-step random walk on a uniform rational grid."""
    rng = Random(seed)
    rows = [[Fraction(0)] * d]
    for _ in range(M):
        rows.append([v + step * rng.choice((1, -1)) for v in rows[-1]])
    times = [Fraction(k, M) for k in range(M + 1)]
    return SampledPath.over_labels(times, rows, d, RATIONAL)


def _quadratic_fields(seed: int) -> ButcherTable:
    """Random quadratic vector fields, e = 2, d = 2."""
    rng = Random(seed)
    monomials = ("", "y1", "y2", "y1^2", "y1*y2", "y2^2")

    def poly() -> str:
        out = ""
        for mono in monomials:
            c = rng.randint(-3, 3)
            if c == 0:
                continue
            term = f"{abs(c)}*{mono}" if mono else f"{abs(c)}"
            if not out:
                out = term if c > 0 else f"-{term}"
            else:
                out += f" + {term}" if c > 0 else f" - {term}"
        return out or "0*y1"

    return ButcherTable.parse({1: [poly(), poly()], 2: [poly(), poly()]})


def test_criterion_01_hopf_axioms_grade_five_exact():
    with budget(60):
        for d in (1, 2):
            basis = enumerate_forests(5, d)
            elems = {h: HElem.from_forest(h, d) for h in basis}
            cops = {h: coproduct(x) for h, x in elems.items()}
            for h, x in elems.items():
                dx = cops[h]
                # coassociativity: both double coproducts as triple expansions
                left: dict = {}
                for (a, b), c in dx.terms.items():
                    for (a1, a2), c2 in coproduct(HElem.from_forest(a, d)).terms.items():
                        k = (a1, a2, b)
                        left[k] = left.get(k, 0) + c * c2
                right: dict = {}
                for (a, b), c in dx.terms.items():
                    for (b1, b2), c2 in coproduct(HElem.from_forest(b, d)).terms.items():
                        k = (a, b1, b2)
                        right[k] = right.get(k, 0) + c * c2
                assert left == right
                # grading: the legs of every term sum to the grade
                assert all(a.grade + b.grade == h.grade for (a, b) in dx.terms)
                # antipode is a two-sided convolution inverse of the identity
                unit_part = HElem.unit(d).scale(counit(x))
                assert dx.map_left(lambda a: antipode(HElem.from_forest(a, d))).multiply_out() == unit_part
                acc = HElem.zero(d)
                for (a, b), c in dx.terms.items():
                    acc = acc + product(HElem.from_forest(a, d), antipode(HElem.from_forest(b, d))).scale(c)
                assert acc == unit_part
            # coproduct is an algebra morphism
            pairs = 0
            for i, h1 in enumerate(basis):
                for h2 in basis[i:]:
                    if h1.grade + h2.grade > 5:
                        continue
                    pairs += 1
                    lhs = coproduct(product(elems[h1], elems[h2]))
                    assert lhs == cops[h1].componentwise_product(cops[h2])
            assert pairs >= len(basis)


def test_criterion_02_pairing_duality_and_group_structure():
    with budget(60):
        # <f * g, h> counts the coproduct splittings of h; the oracle counts
        # them by brute-force vertex subsets
        checked = 0
        for d in (1, 2):
            for h in enumerate_forests(4, d):
                H = HElem.from_forest(h, d)
                oracle = forest_coproduct_oracle(h)
                for (a, b), cnt in oracle.items():
                    F = HElem.from_forest(a, d)
                    G = HElem.from_forest(b, d)
                    assert pair(convolve(F, G, 4), H) == cnt
                    checked += 1
                # one absent splitting per inner grade must pair to zero
                for g1 in range(1, h.grade):
                    done = False
                    for f in enumerate_forests(g1, d):
                        if f.grade != g1 or done:
                            continue
                        for g in enumerate_forests(h.grade - g1, d):
                            if g.grade != h.grade - g1 or (f, g) in oracle:
                                continue
                            zero = pair(convolve(HElem.from_forest(f, d), HElem.from_forest(g, d), 4), H)
                            assert zero == 0
                            checked += 1
                            done = True
                            break
        assert checked > 1000

        rng = Random(5)
        d = 2
        trees = enumerate_trees(4, d)
        cherry2 = Forest((trees[0], trees[0]))
        for _ in range(3):
            coeffs = {Forest((t,)): Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for t in trees}
            prim = HElem({k: c for k, c in coeffs.items() if c}, d)
            # exp of a primitive is group-like; log recovers it exactly
            assert is_primitive(prim, 4)
            g = exp_star(prim, 4)
            assert is_group_like(g, 4)
            assert log_star(g, 4) == prim
            # exp/log stay mutually inverse off the primitive locus too
            h = prim + HElem.from_forest(cherry2, d, Fraction(3, 2))
            assert log_star(exp_star(h, 4), 4) == h.truncate(4)
            assert not is_primitive(h, 4)
        for _ in range(3):
            # a multiplicative character is group-like and its log primitive
            vals = {t: Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for t in trees}
            terms = {Forest(()): Fraction(1)}
            for f in enumerate_forests(4, d):
                if f.is_unit():
                    continue
                c = Fraction(1)
                for t in f.factors:
                    c *= vals[t]
                if c:
                    terms[f] = c
            g = HElem(terms, d)
            assert is_group_like(g, 4)
            assert is_primitive(log_star(g, 4), 4)
            assert not is_group_like(g + HElem.from_forest(cherry2, d), 4)


def test_criterion_03_morphism_identities_and_pinned_images():
    with budget(30):
        for which in ("psi", "phi_g"):
            for d in (1, 2):
                report = verify_hopf_morphism(which, 4, d)
                assert report["status"] == "pass", report
        # pinned images on the smallest trees
        assert psi(HElem.from_tree(leaf(1), 1), 1) == parse_tensor("b_1", 1, 1)
        for i in (1, 2):
            for j in (1, 2):
                got = psi(HElem.from_tree(graft([leaf(j)], i), 2), 2)
                assert got == parse_tensor(f"b_{j} (x) b_{i} + [b_{j}]_{i}", 2, 2)
        cherry = psi(HElem.from_tree(graft([leaf(1), leaf(1)], 1), 1), 3)
        expected = "[b_1 b_1]_1 + 2 * b_1 (x) [b_1]_1 + 2 * b_1 (x) b_1 (x) b_1"
        assert cherry == parse_tensor(expected, 1, 3)


def test_criterion_04_lift_dichotomy_and_quadratic_covariation_defect():
    with budget(30):
        path = _walk(7, 2, 16, Fraction(1, 2))
        Xg = canonical_lift(path, 3)
        rep = validate(Xg)
        assert rep["character"]["status"] == "pass"
        assert rep["chen"]["status"] == "pass"
        assert geometricity_report(embed_geometric(Xg))["status"] == "pass"

        Xb = ito_lift(path, 3)
        repb = validate(Xb)
        assert repb["character"]["status"] == "pass"
        assert repb["chen"]["status"] == "pass"
        geo = geometricity_report(Xb)
        assert geo["status"] == "fail" and geo["defects"] > 0
        # the shuffle defect over the whole span is minus the discrete
        # quadratic covariation, component pair by component pair
        rows = path.values
        for i in (1, 2):
            for j in (1, 2):
                qv = sum(
                    (rows[k + 1][i - 1] - rows[k][i - 1]) * (rows[k + 1][j - 1] - rows[k][j - 1])
                    for k in range(16)
                )
                assert ibp_defect(Xb, i, j, 0, 16) == -qv


def test_criterion_05_conversion_certificate_exact():
    with budget(120):
        for seed, d, N in ((3, 1, 3), (4, 2, 2)):
            X = ito_lift(_walk(seed, d, 8, Fraction(1, 2)), N)
            result = encode(X)
            cert = result.certificate
            assert cert["status"] == "pass", cert
            assert cert["checked_forests"] == len(enumerate_forests(N, d))
            assert cert["checked_pairs"] == 36
            assert len(result.geometric.letters) == len(enumerate_trees(N, d))


def test_criterion_06_identical_trajectories_across_encoding():
    with budget(60):
        f = ButcherTable.parse(
            {1: ["y1^2 + y2", "y1*y2"], 2: ["y2^2", "y1 + 1"]}
        )
        xi = (Fraction(1), Fraction(-1, 2))
        X = ito_lift(_walk(11, 2, 16, Fraction(1, 2)), 2)
        branched = solve_branched(X, f, xi)
        result = encode(X, certify_result=False)
        geometric = solve_geometric(result.geometric, convert_rde(f, result), xi)
        assert branched.values == geometric.values
        discrepancy = max(
            abs(a - b)
            for va, vb in zip(branched.values, geometric.values)
            for a, b in zip(va, vb)
        )
        assert discrepancy == 0


def test_criterion_07_derivative_grafting_identity():
    with budget(60):
        f = _quadratic_fields(13)
        pairs = 0
        for lam in enumerate_trees(3, 2):
            for h in enumerate_trees(4 - lam.grade, 2):
                res = check_lgl(f, lam, h, 4)
                assert res.ok, res.witness
                pairs += 1
        assert pairs == 92


def test_criterion_08_one_step_order_ratio():
    with budget(10):
        field = {leaf(1): PolyVectorField.parse(["y1"])}
        errs = {}
        for den in (2, 4, 8):
            dt = Fraction(1, den)
            path = SampledPath.over_labels([Fraction(0), dt], [[Fraction(0)], [dt]], 1, RATIONAL)
            Xg = canonical_lift(path, 3)
            terminal = solve_geometric(Xg, field, (Fraction(1),)).values[-1][0]
            # one step of the level-3 scheme is the exact cubic Taylor jet
            assert terminal == sum(dt**k / math.factorial(k) for k in range(4))
            errs[den] = abs(math.exp(dt) - float(terminal))
        assert 14 <= errs[2] / errs[4] <= 18
        assert 14 <= errs[4] / errs[8] <= 18


def test_criterion_09_ito_correction_at_scale():
    with budget(120):
        M = 4096
        step = 1.0 / 64.0
        f = ButcherTable.parse({1: ["y1"]})
        rel_errs = []
        for seed in range(20):
            rng = Random(seed)
            vals = [0.0]
            for _ in range(M):
                vals.append(vals[-1] + step * rng.choice((1.0, -1.0)))
            times = [k / M for k in range(M + 1)]
            path = SampledPath.over_labels(times, [[v] for v in vals], 1, FLOAT)
            X = ito_lift(path, 2)
            terminal = solve_branched(X, f, (1.0,)).values[-1][0]
            # every square is the exact dyadic 1/4096, so qv is exactly 1.0
            qv = sum((vals[k + 1] - vals[k]) ** 2 for k in range(M))
            ref = math.exp(vals[-1] - qv / 2.0)
            rel_errs.append(abs(terminal - ref) / abs(ref))
            sd = simplify_n2(encode(X, certify_result=False, check_cocycle=False))
            # the symmetric driver component carries minus the quadratic
            # variation for a left-point lift; both equalities are exact
            assert sd.symmetric_path(1, 1)[-1] == -qv
            assert sd.covariation(1, 1)[-1] == qv
        assert sum(rel_errs) / len(rel_errs) < 2e-2


def test_criterion_10_parser_round_trip_and_structured_errors():
    with budget(30):
        rng = Random(2026)
        for case in range(500):
            d = 1 + case % 2
            forests = list(enumerate_forests(4, d))
            picks = rng.sample(forests, rng.randint(1, 4))
            terms = {
                f: Fraction(rng.choice((1, -1)) * rng.randint(1, 9), rng.randint(1, 9))
                for f in picks
            }
            x = HElem(terms, d)
            assert parse_h(print_h(x), d) == x
        for case in range(500):
            d = 1 + case % 2
            words = list(enumerate_words(4, d, 2))
            picks = rng.sample(words, rng.randint(1, 4))
            terms = {
                w: Fraction(rng.choice((1, -1)) * rng.randint(1, 9), rng.randint(1, 9))
                for w in picks
            }
            x = TensorElem(terms, d, 2)
            assert parse_tensor(print_tensor(x), d, 2) == x

        corpus = [
            "",
            "b_",
            "b_0",
            "b_1]_2",
            "[b_1",
            "[]_1",
            "[b_1 b_1]_",
            "1 +",
            "+",
            "* b_1",
            "3/ * b_1",
            "1/0 * b_1",
            "b_1 b",
            "b_1 (x",
            "b_1 (x) ",
            "(x) b_1",
            "b_1 (x (x) b_2",
            "b_1 ** b_2",
            "[[b_1]_1",
            "b_3",
            "2 2 * b_1",
            "b_1 + + b_2",
            "_1",
            "4*",
        ]
        alphabet = "b_[]()x*+-/123 "
        for _ in range(200):
            corpus.append("".join(rng.choice(alphabet) for _ in range(rng.randint(1, 20))))
        for text in corpus:
            for attempt in (lambda: parse_h(text, 2), lambda: parse_tensor(text, 2, 2)):
                try:
                    attempt()
                except ParseError as e:
                    # malformed input fails with a located error, never a
                    # stray exception type
                    assert isinstance(e.line, int) and e.line >= 1
                    assert isinstance(e.col, int) and e.col >= 1
