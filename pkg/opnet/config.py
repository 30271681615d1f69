"""Application settings."""
from pydantic import BaseSettings, PositiveInt, confloat

NonNegativeFloat = confloat(ge=0)


class OpnetSettings(BaseSettings):
    """Numerical and runtime settings"""

    # positivity and hermiticity checks
    psd_tolerance: NonNegativeFloat = 1e-9
    hermitian_tolerance: NonNegativeFloat = 1e-9

    # trace normalizations of operations, states and process operators
    normalization_tolerance: NonNegativeFloat = 1e-9

    # zero-denominator threshold, scaled by the product of the dimensions involved
    null_tolerance: NonNegativeFloat = 1e-12

    # smallest/largest singular value ratio below which S counts as singular
    invertibility_ratio: NonNegativeFloat = 1e-10
    unitarity_tolerance: NonNegativeFloat = 1e-8
    basis_tolerance: NonNegativeFloat = 1e-12

    # side length cap of any intermediate operator during contraction
    max_live_dimension: PositiveInt = 4096

    outcome_separator: str = "|"
    max_workers: PositiveInt = 1
    involution_trials: PositiveInt = 20
    log_level: str = "WARNING"

    class Config:
        """model config"""

        env_file = ".env"
        env_prefix = "OPNET_"

    def null_threshold(self, *dims: int) -> float:
        """scale-aware zero test threshold"""
        scale = 1
        for d in dims:
            scale *= d
        return self.null_tolerance * max(scale, 1)


settings: OpnetSettings = OpnetSettings()


def inject_settings(base_settings: OpnetSettings):
    """Inject settings to global scope"""
    global settings
    settings = base_settings
