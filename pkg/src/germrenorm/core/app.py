from __future__ import annotations

from logging import getLogger
from typing import Any, List, Optional, Type, TypeVar, Union

from injector import Injector, Module, provider, singleton

from germrenorm.config import Config, ConfigModule, GeometryConfig
from germrenorm.core.engine import RenormEngine
from germrenorm.core.logger import setup_logger
from germrenorm.geometry.flat import FlatGeometry

logger = getLogger(__name__)

T = TypeVar("T")


class EngineModule(Module):
    """
    Provides the default geometry and the engine façade.

    The default geometry is flat massless R^d; `dim` and `mass` come from the CLI flags or the
    optional `geometry` config section.
    """

    def __init__(self, dim: Optional[int] = None, mass: Optional[float] = None) -> None:
        self._dim = dim
        self._mass = mass

    @provider
    @singleton
    def geometry(self, config: Config) -> FlatGeometry:
        section = config.get_section("geometry", GeometryConfig) or GeometryConfig()
        dim = self._dim if self._dim is not None else section.dim
        mass = self._mass if self._mass is not None else section.mass
        return FlatGeometry.from_document(dim, mass, section.metric)

    @provider
    @singleton
    def engine(self, config: Config, geometry: FlatGeometry) -> RenormEngine:
        return RenormEngine(config, geometry)


class AppManager:
    """
    Application manager: owns the injector and configures logging.

    Args:
        config_path (str): Path to the configuration file.
        modules (List[Union[Module, Type[Module]]]): Extra injector modules.
        dim (Optional[int]): Default spatial dimension.
        mass (Optional[float]): Default field mass.
        **overrides: Config sections overriding the file, e.g. quadrature={"t_level": 4}.
    """

    def __init__(
        self,
        config_path: str,
        modules: Optional[List[Union[Module, Type[Module]]]] = None,
        dim: Optional[int] = None,
        mass: Optional[float] = None,
        **overrides: Any,
    ):
        self.injector = Injector(
            [ConfigModule(config_path, **overrides), EngineModule(dim, mass)] + list(modules or [])
        )
        self.config = self.injector.get(Config)
        setup_logger(self.config)
        logger.debug(f"app manager ready with config {config_path}")

    def get_instance(self, cls: Type[T]) -> T:
        return self.injector.get(cls)

    def get_injector(self) -> Injector:
        return self.injector

    def get_engine(self) -> RenormEngine:
        return self.injector.get(RenormEngine)


def create_app_manager(
    config_path: str = "config.json",
    modules: Optional[List[Union[Module, Type[Module]]]] = None,
    **overrides: Any,
) -> AppManager:
    """
    Create the application manager.

    Example:
        manager = create_app_manager("config.yaml", dim=4, engine={"jobs": 4})
        report = manager.get_engine().poles({"vertices": [1, 2], "edges": [[1, 2], [1, 2]]})
    """
    return AppManager(config_path, modules, **overrides)


__all__ = ["AppManager", "EngineModule", "create_app_manager"]
