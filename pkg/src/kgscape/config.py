"""Engine and service configuration with environment overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field


@dataclass
class EngineConfig:
    clustering_eps: float = 0.05
    clustering_min_pts: int = 2
    clustering_kmax: int = 8
    clustering_seed: int = 0
    sampling_budget: int = 300
    sampling_sigma_default: float = 0.5
    spacing: float = 300.0
    node_radius: float = 5.0
    connected_cap: int = 2000
    embedding_provider: str = "offline"
    embedding_dimension: int = 256

    def make_embedder(self):
        from .clustering import HashedTfEmbedding

        # Only the offline provider ships; an HTTP provider can slot in behind
        # the same protocol via embedding_provider="<endpoint url>".
        return HashedTfEmbedding(self.embedding_dimension)

    @classmethod
    def from_env(cls, env: dict | None = None) -> "EngineConfig":
        env = env if env is not None else dict(os.environ)
        cfg = cls()
        mapping = {
            "KGSCAPE_CLUSTERING_EPS": ("clustering_eps", float),
            "KGSCAPE_CLUSTERING_MIN_PTS": ("clustering_min_pts", int),
            "KGSCAPE_CLUSTERING_KMAX": ("clustering_kmax", int),
            "KGSCAPE_CLUSTERING_SEED": ("clustering_seed", int),
            "KGSCAPE_SAMPLING_BUDGET": ("sampling_budget", int),
            "KGSCAPE_SAMPLING_SIGMA": ("sampling_sigma_default", float),
            "KGSCAPE_SPACING": ("spacing", float),
            "KGSCAPE_CONNECTED_CAP": ("connected_cap", int),
        }
        for key, (attr, cast) in mapping.items():
            if key in env:
                setattr(cfg, attr, cast(env[key]))
        return cfg


@dataclass
class ServiceConfig:
    engine: EngineConfig = field(default_factory=EngineConfig)
    data_dir: str = "./kgscape-data"
    offline: bool = True
    port: int = 8400
    llm_endpoint: str = ""
    llm_model: str = ""
    llm_api_key: str = ""
    llm_timeout: float = 30.0
    max_graph_elements: int = 200_000
    job_timeout: float = 60.0
    async_threshold: int = 20_000

    @classmethod
    def from_env(cls, env: dict | None = None) -> "ServiceConfig":
        env = env if env is not None else dict(os.environ)
        cfg = cls(engine=EngineConfig.from_env(env))
        cfg.data_dir = env.get("KGSCAPE_DATA_DIR", cfg.data_dir)
        cfg.offline = env.get("KGSCAPE_OFFLINE", "1") not in ("0", "false", "no")
        cfg.port = int(env.get("KGSCAPE_PORT", cfg.port))
        cfg.llm_endpoint = env.get("KGSCAPE_LLM_ENDPOINT", cfg.llm_endpoint)
        cfg.llm_model = env.get("KGSCAPE_LLM_MODEL", cfg.llm_model)
        cfg.llm_api_key = env.get("KGSCAPE_LLM_API_KEY", cfg.llm_api_key)
        return cfg

    def make_client(self):
        """HTTP chat client when configured and not offline, else None."""
        if self.offline or not self.llm_endpoint:
            return None
        from .llm import HttpChatClient

        return HttpChatClient(
            endpoint=self.llm_endpoint,
            model=self.llm_model,
            api_key=self.llm_api_key,
            timeout=self.llm_timeout,
        )
