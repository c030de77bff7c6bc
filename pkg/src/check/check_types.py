from typing import Callable, Dict

from check import assumption_checks, curve_checks, smooth2d_checks, surface_checks
from check.base_check import Check
from check.check_parser import CheckParser
from util.errors import ConfigError

type CreateCheck = Callable[[CheckParser], Check]


class CheckTypes:
    """A utility class for mapping check names, per suite, to check classes"""

    check_types: Dict[str, Dict[str, CreateCheck]] = {
        "assumption": {
            "basic-assumption": assumption_checks.BasicAssumptionCheck,
            "lemma1": assumption_checks.Lemma1Check,
            "monotone-ordering": assumption_checks.MonotoneOrderingCheck,
            "projection-roundtrip": assumption_checks.ProjectionRoundtripCheck,
            "slope-consistency": assumption_checks.SlopeConsistencyCheck,
            "ode-oracle": assumption_checks.OdeOracleCheck,
            "leafwise-derivative": assumption_checks.LeafwiseDerivativeCheck,
        },
        "smooth2d": {
            "partition-of-unity": smooth2d_checks.PartitionOfUnityCheck,
            "grid-leaf-exactness": smooth2d_checks.GridLeafExactnessCheck,
            "plateau": smooth2d_checks.PlateauCheck,
            "h-monotone": smooth2d_checks.HMonotoneCheck,
            "h-sup-error": smooth2d_checks.HSupErrorCheck,
            "h-leafwise-derivative": smooth2d_checks.HLeafwiseDerivativeCheck,
            "h-convergence": smooth2d_checks.HConvergenceCheck,
            "lemma2": smooth2d_checks.Lemma2Check,
            "theorem1": smooth2d_checks.Theorem1Check,
        },
        "surface": {
            "grid-leaf-exactness": surface_checks.SurfaceGridLeafExactnessCheck,
            "plateau": surface_checks.SurfacePlateauCheck,
            "prop2": surface_checks.Prop2Check,
            "theorem2": surface_checks.Theorem2Check,
            "surface-consistency": surface_checks.SurfaceConsistencyCheck,
        },
        "curve": {
            "lemma3": curve_checks.Lemma3Check,
            "blend-weights": curve_checks.BlendWeightsCheck,
            "pi-delta-roundtrip": curve_checks.PiDeltaRoundtripCheck,
            "lemma5": curve_checks.Lemma5Check,
            "corollary1": curve_checks.Corollary1Check,
            "leaf-separation": curve_checks.LeafSeparationCheck,
            "grad-pi-final": curve_checks.GradPiFinalCheck,
            "pi-delta-convergence": curve_checks.PiDeltaConvergenceCheck,
            "corollary1-convergence": curve_checks.Corollary1ConvergenceCheck,
            "final-bound-convergence": curve_checks.FinalBoundConvergenceCheck,
        },
    }

    @staticmethod
    def names(suite: str) -> list[str]:
        return list(CheckTypes.check_types[suite])

    @staticmethod
    def lookup(suite: str, name: str) -> CreateCheck:
        name = name.casefold()
        creator = CheckTypes.check_types[suite].get(name)
        if creator is None:
            known = ", ".join(CheckTypes.names(suite))
            raise ConfigError(f"unknown check {name} for suite {suite}; known: {known}", field="checks")
        return creator

    @staticmethod
    def create_check(check_parser: CheckParser) -> Check:
        return CheckTypes.lookup(check_parser.suite, check_parser.name)(check_parser)
