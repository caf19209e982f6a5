from functools import lru_cache
from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict

from fractal_core.models import AlphaContext, MeshSpec, SearchBudget


class Settings(BaseSettings):
    """
    Runtime defaults, overridable through FRACTAL_* environment variables
    or a .env file
    """

    model_config = SettingsConfigDict(env_prefix="FRACTAL_", env_file=".env", extra="ignore")

    alpha: float = 0.5
    s: float = 0.5
    tol_base: float = 1e-12
    tol_violation: float = 1e-9
    grid_n: int = 64
    t_grid_n: int = 128
    random_trials: int = 100_000
    refine_steps: int = 40
    seed: int = 0
    u_max: float = 10.0
    workers: int = 1
    n_intervals: int = 4096
    refinement_levels: int = 4
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"

    def context(self, **overrides) -> AlphaContext:
        fields = {
            "alpha": self.alpha,
            "s": self.s,
            "tol_base": self.tol_base,
            "tol_violation": self.tol_violation,
        }
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return AlphaContext(**fields)

    def budget(self, **overrides) -> SearchBudget:
        fields = {
            "grid_n": self.grid_n,
            "t_grid_n": self.t_grid_n,
            "random_trials": self.random_trials,
            "refine_steps": self.refine_steps,
            "seed": self.seed,
            "u_max": self.u_max,
            "workers": self.workers,
        }
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return SearchBudget(**fields)

    def mesh(self) -> MeshSpec:
        return MeshSpec(n_intervals=self.n_intervals, refinement_levels=self.refinement_levels)


@lru_cache
def get_settings() -> Settings:
    return Settings()
