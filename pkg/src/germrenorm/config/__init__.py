from typing import Any

from injector import Module, provider, singleton

from .config import (
    CACHE_DIR_ENV,
    ChiMethod,
    Config,
    EngineConfig,
    GeometryConfig,
    LoggerConfig,
    QuadratureConfig,
    ServerConfig,
    load_config,
)


class ConfigModule(Module):
    def __init__(self, config_path: str, **overrides: Any) -> None:
        self._config_path = config_path
        self._overrides = overrides

    @provider
    @singleton
    def config(self) -> Config:
        return load_config(config_path=self._config_path, **self._overrides)

    @provider
    @singleton
    def quadrature(self, config: Config) -> QuadratureConfig:
        return config.quadrature

    @provider
    @singleton
    def engine(self, config: Config) -> EngineConfig:
        return config.engine


__all__ = [
    "CACHE_DIR_ENV",
    "ChiMethod",
    "Config",
    "ConfigModule",
    "EngineConfig",
    "GeometryConfig",
    "LoggerConfig",
    "QuadratureConfig",
    "ServerConfig",
    "load_config",
]
