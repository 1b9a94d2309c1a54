"""
Engine orchestrator.

Coordinates configuration, the analysis services and report output for one
batch job. Every verb maps onto one module operation; exceptions become
exit codes.
"""

import logging
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from ..analysis import service as analysis
from ..cli.service import ReportWriter, RichUserInterface
from ..config.service import ConfigurationService, EngineConfig
from ..duality import service as duality
from ..formula import service as formulas
from ..formula.service import Formula, SignatureClass
from ..geometry.service import polyhedron_equal, polyhedron_from_json, polyhedron_to_json
from ..limits import service as limits
from ..pwl.service import IntervalPwl, compile_formula, dump_interval, dump_pwl
from ..scalar.service import CReal, load_registry
from ..selftest.service import SUITE_ORDER, SelftestService
from .abstractions import (
    BusinessLogicError,
    CellCapExceeded,
    ConfigurationError,
    ExitCode,
    InvariantViolation,
    IUserInterface,
    JobSpec,
    ProcessingResult,
    ProcessingStatus,
    SequenceError,
    ValidationError,
    Verb
)
from .utils import PathManager, PerformanceTimer, RationalCodec

logger = logging.getLogger(__name__)

Report = Tuple[str, Dict[str, Any]]

AVAILABLE_SUITES = ("all",) + SUITE_ORDER


class EngineOrchestrator:
    """
    Runs batch jobs against the engine services.

    Configuration is loaded once; each job carries its own precision, cap,
    seed and output settings.
    """

    def __init__(self, config_path: str = "config.yaml", ui: Optional[IUserInterface] = None):
        """
        Initialize the orchestrator.

        Args:
            config_path: Path to configuration file
            ui: Status output, rich on stderr by default
        """
        self.config_path = config_path
        self.config: Optional[EngineConfig] = None
        self.ui: IUserInterface = ui or RichUserInterface(quiet=True)
        self._registry: Optional[Dict[str, CReal]] = None
        self._handlers: Dict[Verb, Callable[[JobSpec], Report]] = {
            Verb.EVAL: self._eval,
            Verb.TRUTH_DEGREE: self._degree(analysis.truth_degree),
            Verb.PROVABILITY_DEGREE: self._degree(analysis.provability_degree),
            Verb.UNIT_NORM: self._degree(analysis.unit_norm),
            Verb.INTEGRAL: self._degree(analysis.integral_state),
            Verb.CONSEQUENCE: self._consequence,
            Verb.CONSISTENT: self._consistent,
            Verb.LIMIT_CHECK: self._limit_check,
            Verb.SANDWICH: self._sandwich,
            Verb.APPROX: self._approx,
            Verb.ZEROSET: self._zeroset,
            Verb.PRESENT: self._present,
            Verb.MVGEN: self._mvgen,
            Verb.EXTEND: self._extend,
            Verb.SUBST_CHECK: self._subst_check,
            Verb.SELFTEST: self._selftest,
        }

    def initialize(self, config: Optional[EngineConfig] = None) -> bool:
        """
        Load and validate configuration.

        Returns:
            True if initialization successful, False otherwise
        """
        try:
            config_service = ConfigurationService()
            self.config = config or config_service.load_config(self.config_path)
            config_service.validate_config(self.config)
            return True
        except BusinessLogicError as e:
            self.ui.display_error(f"Failed to initialize engine: {e}")
            return False

    def run(self, job: JobSpec) -> ProcessingResult:
        """
        Run one job and emit its report.

        Args:
            job: The batch job

        Returns:
            ProcessingResult whose exit_code follows the engine's exit-code table
        """
        if self.config is None and not self.initialize():
            return ProcessingResult(ProcessingStatus.FAILED, error_message="configuration failed",
                                    exit_code=ExitCode.VALIDATION)
        try:
            with PerformanceTimer(f"verb {job.verb.value}"):
                report_name, payload = self._handlers[job.verb](job)
                writer = ReportWriter(job.output_format, job.seed,
                                      self.config.output.validate_schemas, self.config.output.schema_dir)
                text = writer.render(report_name, payload)
            self._emit(job, text)
            exit_code = ExitCode.OK
            status = ProcessingStatus.COMPLETED
            if job.verb == Verb.SELFTEST and not payload["passed"]:
                self.ui.display_error("self-test failures reported")
                exit_code = ExitCode.INVARIANT
                status = ProcessingStatus.FAILED
            return ProcessingResult(status, payload, metadata={"report": report_name, "text": text},
                                    exit_code=exit_code)
        except CellCapExceeded as e:
            return self._failure(e, ExitCode.CELL_CAP)
        except InvariantViolation as e:
            return self._failure(e, ExitCode.INVARIANT)
        except (ValidationError, ConfigurationError, SequenceError) as e:
            return self._failure(e, ExitCode.VALIDATION)
        except Exception as e:
            logger.exception("unexpected failure in %s", job.verb.value)
            return self._failure(e, ExitCode.INVARIANT)

    def _failure(self, error: Exception, exit_code: int) -> ProcessingResult:
        self.ui.display_error(str(error))
        return ProcessingResult(ProcessingStatus.FAILED, error_message=str(error), exit_code=exit_code)

    def _emit(self, job: JobSpec, text: str) -> None:
        if job.output_path:
            PathManager.write_text(job.output_path, text)
            self.ui.display_success(f"report written to {job.output_path}")
        else:
            sys.stdout.write(text)
            sys.stdout.flush()

    # inputs

    def _get_registry(self, job: JobSpec) -> Mapping[str, CReal]:
        path = job.options.get("scalars") or self.config.scalar_registry
        if self._registry is None:
            self._registry = load_registry(path, self.config.precision.audit_depth)
        return self._registry

    def _source(self, job: JobSpec) -> str:
        if job.expression is not None:
            return job.expression
        if job.input_path:
            return PathManager.read_text(job.input_path)
        raise ValidationError(f"{job.verb.value} needs a formula: use -e or -f")

    def _formula(self, job: JobSpec) -> Formula:
        return formulas.parse(self._source(job).strip(), self._get_registry(job))

    def _formula_list(self, job: JobSpec, texts: List[str]) -> List[Formula]:
        registry = self._get_registry(job)
        return [formulas.parse(text, registry) for text in texts]

    def _json_input(self, job: JobSpec) -> Any:
        if not job.input_path:
            raise ValidationError(f"{job.verb.value} needs an input file: use -f")
        return PathManager.read_json(job.input_path)

    def _compile(self, job: JobSpec, formula: Formula):
        compiled = compile_formula(formula, precision=job.precision, cap=job.cell_cap,
                                   max_dimension=self.config.complex.max_dimension)
        self._dump(job, compiled)
        return compiled

    def _dump(self, job: JobSpec, compiled) -> None:
        if not job.dump_pwl:
            return
        data = dump_interval(compiled) if isinstance(compiled, IntervalPwl) else dump_pwl(compiled)
        PathManager.write_text(job.dump_pwl, ReportWriter.dump_text(data))
        self.ui.display_info(f"PWL dump written to {job.dump_pwl}")

    # verbs

    def _eval(self, job: JobSpec) -> Report:
        formula = self._formula(job)
        point = job.options.get("point")
        if point:
            coords = RationalCodec.parse_point(point)
        elif formulas.arity(formula) == 0:
            coords = (Fraction(0),)
        else:
            raise ValidationError("eval needs --point for a formula with variables")
        value = formulas.evaluate(formula, coords)
        if isinstance(value, CReal):
            lo, hi = value.approx(job.precision)
            result = analysis.DegreeResult.interval(lo, hi, job.precision)
        else:
            result = analysis.DegreeResult.exact(value)
        payload = result.to_json()
        payload["point"] = RationalCodec.point_to_text(coords)
        return "degree", payload

    def _degree(self, operation: Callable) -> Callable[[JobSpec], Report]:
        def handler(job: JobSpec) -> Report:
            formula = self._formula(job)
            if operation is analysis.provability_degree:
                if job.dump_pwl:
                    self._compile(job, formula)
                return "degree", operation(formula, job.precision, job.cell_cap).to_json()
            return "degree", operation(self._compile(job, formula), cap=job.cell_cap).to_json()
        return handler

    def _premises_and_conclusion(self, job: JobSpec) -> Tuple[List[Formula], Optional[Formula]]:
        premises = list(job.options.get("premises") or [])
        conclusion = job.expression
        if job.input_path:
            data = PathManager.read_json(job.input_path)
            if not isinstance(data, dict):
                raise ValidationError("consequence file must hold {\"premises\": [...], \"conclusion\": ...}")
            premises += list(data.get("premises", []))
            conclusion = conclusion or data.get("conclusion")
        return self._formula_list(job, premises), (formulas.parse(conclusion, self._get_registry(job))
                                                   if conclusion else None)

    def _consequence(self, job: JobSpec) -> Report:
        premises, conclusion = self._premises_and_conclusion(job)
        if conclusion is None:
            raise ValidationError("consequence needs a conclusion: use -e or a file with \"conclusion\"")
        rl = any(formulas.classify(phi) == SignatureClass.RL for phi in premises + [conclusion])
        result = analysis.consequence(premises, conclusion, job.precision if rl else None, job.cell_cap)
        return "consequence", result.to_json()

    def _consistent(self, job: JobSpec) -> Report:
        premises, extra = self._premises_and_conclusion(job)
        if extra is not None:
            premises.append(extra)
        return "consistency", analysis.consistent(premises, job.cell_cap).to_json()

    def _limit_check(self, job: JobSpec) -> Report:
        path = job.options.get("sequence") or job.input_path
        if not path:
            raise ValidationError("limit-check needs a sequence spec: use --sequence")
        spec = PathManager.read_json(path)
        sequence = limits.load_sequence_spec(spec, self._get_registry(job))
        target_text = job.expression or (spec.get("target") if isinstance(spec, dict) else None)
        if not target_text:
            raise ValidationError("limit-check needs a target formula: use -e or \"target\" in the spec")
        target = formulas.parse(target_text, self._get_registry(job))
        threshold = job.options.get("threshold")
        upto = int(job.options.get("upto", self.config.selftest.limit_upto))
        report = limits.check_limit(
            sequence, target, upto,
            threshold=RationalCodec.from_text(threshold) if threshold is not None else None,
            cap=job.cell_cap
        )
        return "limit", report.to_json()

    def _sandwich(self, job: JobSpec) -> Report:
        formula = self._formula(job)
        envelopes = self._compile_envelopes(job, formula)
        return "sandwich", {
            "precision": envelopes.precision,
            "scalars": formulas.scalar_count(formula),
            "width": RationalCodec.to_text(envelopes.width()),
            "lower": dump_pwl(envelopes.lower),
            "upper": dump_pwl(envelopes.upper),
        }

    def _compile_envelopes(self, job: JobSpec, formula: Formula) -> IntervalPwl:
        lower, upper = limits.sandwich(formula, job.precision, cap=job.cell_cap)
        envelopes = IntervalPwl(job.precision, lower, upper)
        self._dump(job, envelopes)
        return envelopes

    def _approx(self, job: JobSpec) -> Report:
        data = self._json_input(job)
        try:
            m, n = int(data["m"]), int(data["n"])
            samples = [RationalCodec.from_text(s) for s in data["samples"]]
            lipschitz = RationalCodec.from_text(data["lipschitz"])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"approx input needs m, n, lipschitz and samples: {e}")
        result = limits.approximate_continuous(samples, m, n, lipschitz, job.cell_cap)
        self._dump(job, result.function)
        return "approximation", {
            "m": m,
            "n": n,
            "error_bound": RationalCodec.to_text(result.error_bound),
            "cells": len(result.function.pieces),
            "function": dump_pwl(result.function),
        }

    def _presentation(self, job: JobSpec) -> duality.Presentation:
        if job.input_path:
            return duality.load_presentation(self._json_input(job), self._get_registry(job),
                                             job.precision, job.cell_cap)
        formula = self._formula(job)
        generator = self._compile(job, formula)
        default = {SignatureClass.L: "MV", SignatureClass.QL: "DMV", SignatureClass.RL: "RMV"}
        algebra = duality.AlgebraClass(job.options.get("algebra") or default[formulas.classify(formula)])
        return duality.Presentation(algebra, generator.dim, generator)

    def _zeroset(self, job: JobSpec) -> Report:
        result = duality.zero_set(self._presentation(job))
        if isinstance(result, duality.ZeroSetEnclosure):
            return "zeroset", {"kind": "enclosure", "precision": result.precision,
                               "outer": polyhedron_to_json(result.outer),
                               "inner": polyhedron_to_json(result.inner)}
        return "zeroset", {"kind": "exact", "polyhedron": polyhedron_to_json(result)}

    def _present(self, job: JobSpec) -> Report:
        polyhedron = polyhedron_from_json(self._json_input(job))
        algebra = duality.AlgebraClass(job.options.get("algebra") or "DMV")
        presentation = duality.presentation_of(polyhedron, algebra, job.cell_cap,
                                               self.config.complex.max_dimension)
        self._dump(job, presentation.generator)
        return "presentation", duality.dump_presentation(presentation)

    def _mvgen(self, job: JobSpec) -> Report:
        if job.input_path or job.options.get("algebra"):
            report = duality.is_mv_generated(self._presentation(job))
        else:
            formula = self._formula(job)
            if formulas.classify(formula) == SignatureClass.RL:
                report = duality.is_mv_generated(self._presentation(job))
            else:
                witness = duality.l_generated_witness(formula, job.cell_cap)
                self._dump(job, witness.witness)
                report = duality.GenerationReport(duality.GenerationVerdict.YES, generator=witness)
        payload: Dict[str, Any] = {"verdict": report.verdict.value}
        if report.generator is not None:
            certificate = report.generator.certificate
            payload["multiplier"] = report.generator.multiplier
            payload["certificate"] = {"source_below_witness": certificate.source_below_witness,
                                      "witness_below_multiple": certificate.witness_below_multiple,
                                      "zero_sets_equal": certificate.zero_sets_equal}
            payload["witness"] = dump_pwl(report.generator.witness)
        if report.enclosure is not None:
            payload["precision"] = report.enclosure.precision
            payload["outer"] = polyhedron_to_json(report.enclosure.outer)
            payload["inner"] = polyhedron_to_json(report.enclosure.inner)
        return "mvgen", payload

    def _extend(self, job: JobSpec) -> Report:
        presentation = self._presentation(job)
        target = duality.AlgebraClass(job.options.get("target") or "RMV")
        extended = duality.extend_scalars(presentation, target)
        payload = duality.dump_presentation(extended)
        if presentation.is_exact:
            payload["zero_set_preserved"] = polyhedron_equal(duality.zero_set(presentation),
                                                             duality.zero_set(extended))
        return "extension", payload

    def _subst_check(self, job: JobSpec) -> Report:
        substitution = duality.load_substitution(self._json_input(job), self._get_registry(job))
        report = duality.is_mv_preserving(substitution, job.cell_cap)
        return "substitution", {
            "preserving": report.preserving,
            "offender": f"v{report.offender}" if report.offender is not None else None,
            "classes": {f"v{index}": klass.value for index, klass in sorted(report.classes.items())},
        }

    def _selftest(self, job: JobSpec) -> Report:
        service = SelftestService(self.config.selftest, seed=job.seed, cap=job.cell_cap)
        suite = job.options.get("suite") or "all"
        reports = service.run_all() if suite == "all" else [service.run(suite)]
        for report in reports:
            if report.passed:
                self.ui.display_success(f"suite {report.name} passed")
            else:
                self.ui.display_warning(f"suite {report.name}: {len(report.failures)} failures")
        return "selftest", {"passed": all(r.passed for r in reports),
                            "suites": [r.to_json() for r in reports]}

