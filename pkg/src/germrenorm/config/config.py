"""
Settings for germrenorm.

Four fixed sections: ``logger``, ``quadrature`` (the rules the sector engine integrates with),
``engine`` (continuation knobs and resource caps) and ``server`` (``germrenorm serve``). Any
other top-level key is kept in ``model_extra`` and parsed on demand with ``get_section``; the
default ``geometry`` lives there.

Values come from a JSON or YAML file, then from keyword overrides (the CLI flags). Without a
file, ``.env`` and ``SECTION__FIELD`` environment variables are read.

.. code-block:: python

    from germrenorm.config import GeometryConfig, load_config

    config = load_config("config.yaml", quadrature={"t_level": 4})
    geometry = config.get_section("geometry", GeometryConfig) or GeometryConfig()
"""

import json
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar

import yaml
from pydantic import Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from germrenorm.common import deep_merge

_DEFAULT_CONFIG_PATH = "config.json"
CACHE_DIR_ENV = "GERMRENORM_CACHE_DIR"

T = TypeVar("T", bound=BaseSettings)

_SETTINGS = SettingsConfigDict(
    env_file=".env",
    env_file_encoding="utf-8",
    env_nested_delimiter="__",
    extra="allow",
)


class ChiMethod(str, Enum):
    """
    How the smooth sector integrand χ_σ is integrated over (x, h).

    Attributes:
        ANALYTIC: exact Gaussian moment integration with forward Taylor t-jets
        HERMITE: tensor Gauss–Hermite quadrature, t-jets by central differences
        MONTE_CARLO: seeded Monte Carlo, t-jets by central differences
    """

    ANALYTIC = "analytic"
    HERMITE = "hermite"
    MONTE_CARLO = "monte-carlo"


class LoggerConfig(BaseSettings):
    """Where the ``germrenorm`` logger writes and at which level."""

    model_config = _SETTINGS

    level: str = Field(default="info", description="Level name of the germrenorm logger")
    format: str = Field(
        default="%(asctime)s |%(levelname)s| %(name)s:%(lineno)d | %(message)s",
        description="Record format for the plain console and file handlers",
    )
    file: Optional[str] = Field(
        default=None,
        description="Log file; no file handler when unset",
        examples=["logs/germrenorm.log"],
    )
    console: bool = Field(default=True, description="Attach a stderr handler")
    rich: bool = Field(default=False, description="Use rich for the stderr handler")


class QuadratureConfig(BaseSettings):
    """
    Quadrature rules for the sector engine and the oracles.

    Attributes:
        t_level (int): tanh-sinh step 2^-t_level on [0, 1] for t- and ℓ-integrals
        hermite_order (int): Gauss–Hermite nodes per h-axis (and per x-axis) for chi_method=hermite
        legendre_order (int): Gauss–Legendre nodes per compact axis
        tail_nodes (int): Gauss–Jacobi nodes of the Gaussian-mixture tail/remainder factors
        chi_method (ChiMethod): integration method for χ_σ
        mc_samples (int): Monte Carlo sample count (χ fallback and oversized t-cubes)
        seed (Optional[int]): Monte Carlo seed, mandatory once Monte Carlo is active
        max_tensor_points (int): largest tensor t-grid before switching to Monte Carlo
        chunk_size (int): batch size for χ-jet evaluation
        fd_step (float): central-difference step for non-analytic χ methods
    """

    model_config = _SETTINGS

    t_level: int = Field(default=3, ge=1, le=7, description="tanh-sinh level on [0,1]")
    hermite_order: int = Field(default=20, ge=2, le=80, description="Gauss–Hermite order")
    legendre_order: int = Field(default=16, ge=2, le=200, description="Gauss–Legendre order")
    tail_nodes: int = Field(default=10, ge=2, le=80, description="Tail mixture nodes")
    chi_method: ChiMethod = Field(default=ChiMethod.ANALYTIC, description="χ integration method")
    mc_samples: int = Field(default=20000, ge=16, description="Monte Carlo samples")
    seed: Optional[int] = Field(default=None, description="Monte Carlo seed")
    max_tensor_points: int = Field(
        default=300_000, ge=1, description="Largest tensor t-grid before Monte Carlo"
    )
    chunk_size: int = Field(default=40_000, ge=1, description="χ-jet batch size")
    fd_step: float = Field(default=1e-3, gt=0, description="Central-difference step")

    @model_validator(mode="after")
    def _seed_for_monte_carlo(self) -> "QuadratureConfig":
        if self.chi_method == ChiMethod.MONTE_CARLO and self.seed is None:
            raise ValueError("a seed is mandatory when chi_method is monte-carlo")
        return self

    def mc_seed(self) -> int:
        """The seed for Monte Carlo fallbacks that the configuration did not request."""
        return 0 if self.seed is None else self.seed


class EngineConfig(BaseSettings):
    """
    Continuation engine configuration.

    Attributes:
        order (Optional[int]): σ-jet order; None selects the divergence-based default
        jobs (int): sector worker processes
        edge_cap (int): maximal number of edges accepted
        tolerance (float): default check tolerance
        realized_tolerance (float): relative threshold for a polar term to count as realized
        cache_dir (Optional[str]): on-disk χ-jet cache directory
    """

    model_config = _SETTINGS

    order: Optional[int] = Field(default=None, ge=0, le=12, description="σ-jet order")
    jobs: int = Field(default=1, ge=1, description="Sector worker processes")
    edge_cap: int = Field(default=16, ge=1, le=16, description="Maximal number of edges")
    tolerance: float = Field(default=1e-4, gt=0, description="Default check tolerance")
    realized_tolerance: float = Field(
        default=1e-8, gt=0, description="Relative threshold for realized poles"
    )
    cache_dir: Optional[str] = Field(default=None, description="On-disk χ-jet cache directory")

    def resolved_cache_dir(self) -> Optional[Path]:
        """Explicit cache_dir, else $GERMRENORM_CACHE_DIR, else None."""
        raw = self.cache_dir or os.environ.get(CACHE_DIR_ENV)
        return Path(raw) if raw else None


class ServerConfig(BaseSettings):
    """Bind address and OpenAPI metadata for `germrenorm serve`."""

    model_config = _SETTINGS

    host: str = Field(default="127.0.0.1", description="Bind address")
    port: int = Field(default=8080, ge=1, le=65535, description="Bind port")
    workers: int = Field(default=1, ge=1, description="uvicorn worker count")
    title: str = Field(default="germrenorm", description="OpenAPI title")
    description: str = Field(
        default="Renormalized Feynman amplitudes as meromorphic germs",
        description="OpenAPI description",
    )
    version: str = Field(default="0.1.0", description="OpenAPI version")


class GeometryConfig(BaseSettings):
    """
    Default geometry, read from the optional `geometry` extension section.

    Attributes:
        dim (int): spatial dimension
        mass (float): field mass
        metric (Optional[List[List[float]]]): constant metric, None for the identity
    """

    model_config = _SETTINGS

    dim: int = Field(default=4, ge=1, description="Spatial dimension")
    mass: float = Field(default=0.0, ge=0, description="Field mass")
    metric: Optional[List[List[float]]] = Field(default=None, description="Constant metric")


class Config(BaseSettings):
    """
    Root settings object.

    The four fixed sections are typed fields; extension sections such as `geometry` stay in
    `model_extra` until `get_section` parses them.
    """

    model_config = _SETTINGS

    logger: LoggerConfig = Field(default_factory=LoggerConfig, description="Logging")
    quadrature: QuadratureConfig = Field(
        default_factory=QuadratureConfig, description="Quadrature rules"
    )
    engine: EngineConfig = Field(default_factory=EngineConfig, description="Continuation engine")
    server: ServerConfig = Field(default_factory=ServerConfig, description="HTTP server")

    # 段名:类型名 -> 解析结果
    _section_cache: Dict[str, Any] = {}

    def get_section(self, key: str, model_type: Type[T]) -> Optional[T]:
        """
        Parse the extension section ``key`` as ``model_type``.

        Returns None when the section is absent. Parsed sections are memoized per
        ``(key, model_type)``; a section that fails validation raises ValueError naming both.
        """
        cache_key = f"{key}:{model_type.__name__}"
        if cache_key in self._section_cache:
            return self._section_cache[cache_key]
        if not self.has_section(key):
            return None

        try:
            section = model_type.model_validate(self.model_extra[key])
        except ValidationError as exc:
            raise ValueError(
                f"Failed to parse config section '{key}' as {model_type.__name__}: {exc}"
            ) from exc
        self._section_cache[cache_key] = section
        return section

    def has_section(self, key: str) -> bool:
        return bool(self.model_extra) and key in self.model_extra


def _read_document(path: Path) -> Dict[str, Any]:
    if path.suffix == ".json":
        loader = json.load
    elif path.suffix in {".yaml", ".yml"}:
        loader = yaml.safe_load
    else:
        raise ValueError(f"Unsupported config file type: {path.suffix}")
    with path.open("r", encoding="utf-8") as handle:
        return loader(handle) or {}


def load_config(config_path: str = _DEFAULT_CONFIG_PATH, **kwargs: Any) -> Config:
    """
    Build the settings from ``config_path`` with ``kwargs`` merged on top.

    A missing file is not an error: the settings then come from ``.env``, the environment and
    ``kwargs``. Unknown suffixes raise ValueError; invalid values raise pydantic's
    ValidationError.
    """
    path = Path(config_path)
    if not path.exists():
        return Config(**kwargs)
    return Config.model_validate(deep_merge(_read_document(path), kwargs))
