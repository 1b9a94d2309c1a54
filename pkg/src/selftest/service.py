"""
Seeded property suites: the logic's axioms, Pavelka completeness, the
compile/eval oracle, bookkeeping laws, the integral state, envelope
convergence, limits, duality round trips, MV generators, consequence and
the MV/DMV/Riesz equations.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

from ..analysis.service import (
    consequence,
    grid_minimum,
    integral,
    provability_degree,
    truth_degree
)
from ..config.service import SelftestConfig
from ..core.abstractions import ValidationError
from ..core.utils import PerformanceTimer, RationalCodec
from ..duality.service import (
    AlgebraClass,
    extend_scalars,
    mv_generator,
    presentation_of,
    zero_set
)
from ..formula.service import (
    Const1,
    Delta,
    Equiv,
    Eta,
    Formula,
    FormulaGenerator,
    Imp,
    Nabla,
    Neg,
    Odot,
    Oplus,
    Var,
    Zero,
    evaluate,
    parse,
    to_text
)
from ..geometry.service import RationalPolyhedron, Simplex, polyhedron_contains, polyhedron_equal
from ..limits.service import (
    SCHEDULES,
    FormulaSequence,
    check_limit,
    sandwich,
    sandwich_sequence
)
from ..pwl.service import (
    DEFAULT_CELL_CAP,
    CoefficientClass,
    PwlFunction,
    compile_envelopes,
    compile_family,
    compile_formula,
    pwl_equal,
    pwl_leq
)
from ..scalar.service import SQRT2_OVER_2, product, truncated_diff

logger = logging.getLogger(__name__)

SUITE_ORDER = (
    "axioms", "pavelka", "oracle", "bookkeeping", "integral", "sandwich",
    "limits", "duality", "mvgen", "consequence", "mv-equations",
)


@dataclass
class SuiteReport:
    """Instance counts and failure descriptions of one suite run."""
    name: str
    seed: int
    counts: Dict[str, int] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def tally(self, label: str, ok: bool, detail: str = "") -> None:
        self.counts[label] = self.counts.get(label, 0) + 1
        if not ok:
            self.failures.append(f"{label}: {detail}" if detail else label)

    def to_json(self) -> Dict[str, Any]:
        return {"suite": self.name, "passed": self.passed,
                "counts": dict(sorted(self.counts.items())), "failures": list(self.failures)}


class SelftestService:
    """Runs the property suites with one explicit seed."""

    def __init__(self, config: Optional[SelftestConfig] = None, seed: Optional[int] = None,
                 cap: int = DEFAULT_CELL_CAP):
        self.config = config or SelftestConfig()
        self.seed = self.config.seed if seed is None else seed
        self.cap = cap
        self._suites: Dict[str, Callable[[SuiteReport], None]] = {
            "axioms": self._axioms,
            "pavelka": self._pavelka,
            "oracle": self._oracle,
            "bookkeeping": self._bookkeeping,
            "integral": self._integral,
            "sandwich": self._sandwich,
            "limits": self._limits,
            "duality": self._duality,
            "mvgen": self._mvgen,
            "consequence": self._consequence,
            "mv-equations": self._mv_equations,
        }

    def run(self, name: str) -> SuiteReport:
        """
        Run one suite by name.

        Raises:
            ValidationError: If the suite is unknown
        """
        if name not in self._suites:
            raise ValidationError(f"unknown suite {name!r}; expected one of {', '.join(SUITE_ORDER)} or all")
        report = SuiteReport(name, self.seed)
        with PerformanceTimer(f"selftest {name}"):
            self._suites[name](report)
        logger.info("suite %s: %s", name, "pass" if report.passed else f"{len(report.failures)} failures")
        return report

    def run_all(self) -> List[SuiteReport]:
        return [self.run(name) for name in SUITE_ORDER]

    # helpers

    def _generator(self, **overrides) -> FormulaGenerator:
        options = {"max_depth": self.config.max_depth, "max_arity": self.config.max_arity}
        options.update(overrides)
        return FormulaGenerator(self.seed, **options)

    def _compile(self, formula: Formula, dim: Optional[int] = None) -> PwlFunction:
        return compile_formula(formula, dim=dim, cap=self.cap)

    def _is_tautology(self, formula: Formula) -> bool:
        return truth_degree(self._compile(formula)).value == 1

    # suites

    def _axioms(self, report: SuiteReport) -> None:
        gen = self._generator()
        for _ in range(self.config.axiom_instances):
            a, b, c = gen.formula(), gen.formula(), gen.formula()
            r, q = gen.rational(), gen.rational()
            instances = {
                "L1": Imp(a, Imp(b, a)),
                "L2": Imp(Imp(a, b), Imp(Imp(b, c), Imp(a, c))),
                "L3": Imp(Imp(Imp(a, b), b), Imp(Imp(b, a), a)),
                "L4": Imp(Imp(Neg(a), Neg(b)), Imp(b, a)),
                "R1": Equiv(Nabla(r, Imp(a, b)), Imp(Nabla(r, a), Nabla(r, b))),
                "R2": Equiv(Nabla(truncated_diff(r, q), a), Imp(Nabla(q, a), Nabla(r, a))),
                "R3": Equiv(Nabla(r, Nabla(q, a)), Nabla(product(r, q), a)),
                "R4": Equiv(Nabla(Fraction(1), a), a),
            }
            compiled = compile_family([[instance] for instance in instances.values()],
                                      common=(a, b, c), cap=self.cap)
            for (label, instance), (f,) in zip(instances.items(), compiled):
                report.tally(label, truth_degree(f).value == 1, to_text(instance))

    def _pavelka(self, report: SuiteReport) -> None:
        gen = self._generator()
        for _ in range(self.config.pavelka_formulas):
            phi = gen.formula()
            f = self._compile(phi)
            truth = truth_degree(f).value
            provability = provability_degree(phi, cap=self.cap).value
            brute = grid_minimum(f, f.complex.vertices())
            report.tally("degrees", truth == provability, to_text(phi))
            report.tally("grid", truth == brute, to_text(phi))

    def _oracle(self, report: SuiteReport) -> None:
        gen = self._generator(max_depth=max(self.config.max_depth, 6))
        n = self.config.max_arity
        for _ in range(self.config.oracle_formulas):
            phi = gen.formula()
            f = self._compile(phi, dim=n)
            for _ in range(self.config.oracle_points):
                x = gen.point(n)
                report.tally("points", f(x) == evaluate(phi, x),
                             f"{to_text(phi)} at {RationalCodec.point_to_text(x)}")

    def _bookkeeping(self, report: SuiteReport) -> None:
        gen = self._generator()
        for _ in range(self.config.bookkeeping_pairs):
            r, q = gen.rational(), gen.rational()
            report.tally("negation", self._is_tautology(Equiv(Neg(Eta(r)), Eta(1 - r))), f"r={r}")
            report.tally("implication", self._is_tautology(
                Equiv(Imp(Eta(r), Eta(q)), Eta(min(Fraction(1), 1 - r + q)))), f"r={r} q={q}")
            report.tally("scaling", self._is_tautology(Equiv(Delta(r, Eta(q)), Eta(r * q))), f"r={r} q={q}")
            report.tally("evaluation", truth_degree(Eta(r)).value == r, f"r={r}")
            report.tally("order", (r <= q) == self._is_tautology(Imp(Eta(r), Eta(q))), f"r={r} q={q}")

    def _integral(self, report: SuiteReport) -> None:
        report.tally("anchors", integral(self._compile(Var(1))) == Fraction(1, 2))
        report.tally("anchors", integral(self._compile(Oplus(Var(1), Var(1)))) == Fraction(3, 4))
        report.tally("anchors", integral(self._compile(Const1())) == 1)
        n = self.config.max_arity
        gen = self._generator()
        corpus = [parse(text) for text in ("v1 . ~v1", "delta[1/2] v1", "v1 . v1", "v1 \\/ ~v1", "0")]
        corpus += [gen.formula() for _ in range(self.config.integral_formulas)]
        zero = PwlFunction.constant(n, Fraction(0))
        for phi in corpus:
            f = self._compile(phi, dim=n)
            value = integral(f)
            report.tally("zero-characterization", (value == 0) == self._is_tautology(Neg(phi)), to_text(phi))
            report.tally("complement", integral(self._compile(Neg(phi), dim=n)) == 1 - value, to_text(phi))
            other = Odot(Neg(phi), gen.formula())
            if pwl_equal(self._compile(Odot(phi, other), dim=n), zero):
                additive = integral(self._compile(Oplus(phi, other), dim=n)) == value + integral(
                    self._compile(other, dim=n))
                report.tally("additivity", additive, to_text(phi))
            else:
                report.tally("disjointness", False, to_text(phi))

    def _sandwich(self, report: SuiteReport) -> None:
        r = SQRT2_OVER_2
        scaled = Delta(r, Var(1))
        example = Neg(Oplus(Delta(r, Var(1)), Delta(r, Var(1))))
        previous = None
        previous_outer = None
        for k in range(self.config.sandwich_max_index + 1):
            bound = Fraction(1, 2 ** k)
            lo, hi = r.approx(k)
            report.tally("scaled-width", compile_envelopes(scaled, k).width() <= bound, f"k={k}")
            envelopes = compile_envelopes(example, k)
            report.tally("example-width", envelopes.width() <= 2 * bound, f"k={k}")
            report.tally("ordered", pwl_leq(envelopes.lower, envelopes.upper), f"k={k}")
            if previous is not None:
                report.tally("monotone", pwl_leq(previous.lower, envelopes.lower)
                             and pwl_leq(envelopes.upper, previous.upper), f"k={k}")
            previous = envelopes
            enclosure = zero_set(envelopes)
            outer_start = enclosure.outer.vertices()[0][0]
            report.tally("outer-endpoint", lo - bound <= outer_start <= hi, f"k={k}")
            if previous_outer is not None:
                report.tally("outer-shrinks", polyhedron_contains(previous_outer, enclosure.outer), f"k={k}")
            previous_outer = enclosure.outer
            if k >= 1:
                if enclosure.inner.is_empty:
                    report.tally("inner-endpoint", False, f"k={k}: empty inner enclosure")
                else:
                    inner_start = enclosure.inner.vertices()[0][0]
                    report.tally("inner-endpoint", lo <= inner_start <= hi + 2 * bound, f"k={k}")

    def _limits(self, report: SuiteReport) -> None:
        upto = self.config.limit_upto
        ramp = FormulaSequence(lambda n: Delta(SCHEDULES["1-2^-n"](n), Var(1)),
                               rate=SCHEDULES["1-2^-n"], name="ramp")
        result = check_limit(ramp, Var(1), upto, cap=self.cap)
        report.tally("ramp", result.holds, "ramp sequence misses its rate")
        wrong = FormulaSequence(lambda n: Var(1), name="constant")
        result = check_limit(wrong, Neg(Var(1)), upto, threshold=Fraction(1, 2), cap=self.cap)
        report.tally("negative", result.settled_from is None and all(row.distance == 1 for row in result.rows),
                     "constant sequence converged to its negation")
        phi = Delta(SQRT2_OVER_2, Var(1))
        result = check_limit(sandwich_sequence(phi), sandwich(phi, upto)[0], upto, cap=self.cap)
        report.tally("envelopes", result.holds, "lower envelopes miss the S·2^-n rate")

    def _random_polyhedron(self, gen: FormulaGenerator) -> RationalPolyhedron:
        simplices = []
        for _ in range(gen.rng.randint(1, 3)):
            dimension = gen.rng.randint(0, 2)
            for _ in range(10):
                candidate = Simplex(tuple(gen.point(2) for _ in range(dimension + 1)))
                if candidate.dimension == dimension and not candidate.is_degenerate():
                    simplices.append(candidate)
                    break
        return RationalPolyhedron(2, tuple(simplices))

    def _duality(self, report: SuiteReport) -> None:
        gen = self._generator()
        half, third = Fraction(1, 2), Fraction(1, 3)
        corpus = [
            RationalPolyhedron(2),
            RationalPolyhedron(2, (Simplex(((half, third),)),)),
            RationalPolyhedron(2, (Simplex(((Fraction(0), Fraction(0)),)),)),
            RationalPolyhedron.cube(2),
        ]
        corpus += [self._random_polyhedron(gen) for _ in range(self.config.duality_polyhedra)]
        for polyhedron in corpus:
            presentation = presentation_of(polyhedron, AlgebraClass.DMV, cap=self.cap)
            detail = str(len(polyhedron.simplices))
            report.tally("roundtrip", polyhedron_equal(zero_set(presentation), polyhedron), detail)
            extended = extend_scalars(presentation, AlgebraClass.RMV)
            report.tally("extension", polyhedron_equal(zero_set(extended), polyhedron), detail)

    def _mvgen(self, report: SuiteReport) -> None:
        gen = self._generator()
        for _ in range(self.config.mvgen_generators):
            phi = gen.formula()
            result = mv_generator(self._compile(phi), self.cap)
            report.tally("integer", result.witness.coefficient_class == CoefficientClass.INTEGER, to_text(phi))
            report.tally("certificate", result.certificate.valid, to_text(phi))

    def _consequence(self, report: SuiteReport) -> None:
        yes = consequence([Var(1)], Oplus(Var(1), Var(1)), cap=self.cap)
        report.tally("anchors", yes.holds, "v1 |= v1 + v1")
        no = consequence([Oplus(Var(1), Var(1))], Var(1), cap=self.cap)
        report.tally("anchors", not no.holds and no.witness == (Fraction(1, 2),), "v1 + v1 |/= v1")
        # premise one-sets stay small at depth 3
        gen = self._generator(max_depth=min(self.config.max_depth, 3))
        for _ in range(self.config.consequence_checks):
            premises = [gen.formula() for _ in range(gen.rng.randint(1, 2))]
            conclusion = gen.formula()
            if consequence(premises, conclusion, cap=self.cap).holds:
                grown = premises + [gen.formula()]
                report.tally("monotonicity", consequence(grown, conclusion, cap=self.cap).holds,
                             " ; ".join(to_text(p) for p in grown) + " |= " + to_text(conclusion))
            else:
                report.tally("monotonicity", True)

    def _mv_equations(self, report: SuiteReport) -> None:
        gen = self._generator(max_depth=min(self.config.max_depth, 4))
        n = self.config.max_arity
        for _ in range(self.config.axiom_instances):
            x, y, z = gen.formula(), gen.formula(), gen.formula()
            r, q = gen.rational(), gen.rational()
            equations = {
                "commutativity": (Oplus(x, y), Oplus(y, x)),
                "associativity": (Oplus(x, Oplus(y, z)), Oplus(Oplus(x, y), z)),
                "zero": (Oplus(x, Zero()), x),
                "absorption": (Oplus(x, Const1()), Const1()),
                "involution": (Neg(Neg(x)), x),
                "chang": (Oplus(Neg(Oplus(Neg(x), y)), y), Oplus(Neg(Oplus(Neg(y), x)), x)),
                "scalar-difference": (Delta(r, Odot(x, Neg(y))), Odot(Delta(r, x), Neg(Delta(r, y)))),
                "scalar-truncation": (Delta(truncated_diff(r, q), x), Odot(Delta(r, x), Neg(Delta(q, x)))),
                "scalar-product": (Delta(r, Delta(q, x)), Delta(product(r, q), x)),
                "scalar-unit": (Delta(Fraction(1), x), x),
            }
            compiled = compile_family([list(sides) for sides in equations.values()],
                                      common=(x, y, z, Neg(x), Neg(y)), dim=n, cap=self.cap)
            for (label, (left, right)), (f, g) in zip(equations.items(), compiled):
                report.tally(label, pwl_equal(f, g), f"{to_text(left)} = {to_text(right)}")
