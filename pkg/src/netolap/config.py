"""Key-value build configuration: input files, dimension order, tunables."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "alpha": 0.85,
    "tau": 0.4,
    "iters": 50,
    "gamma": 0.25,
    "lambda": 0.5,
    "rho": 0.95,
    "embed_dim": 32,
    "min_support": 2,
    "max_edges": 6,
    "weights": (1.0, 1.0, 1.0),
    "precompute": ("summaries",),
    "seed": 0,
    "cpl_sample_seed": 97,
}

_FLOAT_KEYS = {"alpha", "tau", "gamma", "lambda", "rho"}
_INT_KEYS = {"iters", "embed_dim", "min_support", "max_edges", "seed", "cpl_sample_seed"}


@dataclass
class BuildConfig:
    nodes_path: Path
    edges_path: Path
    dimension_files: dict[str, Path]
    params: dict = field(default_factory=dict)

    def param(self, key: str):
        return self.params.get(key, DEFAULTS[key])

    def to_dict(self) -> dict:
        merged = dict(DEFAULTS)
        merged.update(self.params)
        merged["weights"] = list(merged["weights"])
        merged["precompute"] = list(merged["precompute"])
        merged["dimension_order"] = list(self.dimension_files)
        return merged


def parse_build_config(text: str, base_dir: str | Path = ".") -> BuildConfig:
    """Parse `key = value` lines; dimension.<name> entries fix the facet order."""
    base = Path(base_dir)
    nodes_path = None
    edges_path = None
    dimension_files: dict[str, Path] = {}
    params: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "nodes":
            nodes_path = base / value
        elif key == "edges":
            edges_path = base / value
        elif key.startswith("dimension."):
            dim = key[len("dimension.") :]
            if not dim:
                raise ConfigError(f"line {lineno}: dimension entry missing a name")
            if dim in dimension_files:
                raise ConfigError(f"line {lineno}: duplicate dimension {dim!r}")
            dimension_files[dim] = base / value
        elif key in _FLOAT_KEYS:
            params[key] = float(value)
        elif key in _INT_KEYS:
            params[key] = int(value)
        elif key == "weights":
            parts = [float(v) for v in value.split(",")]
            if len(parts) != 3:
                raise ConfigError(f"line {lineno}: weights must be three comma-separated numbers")
            params[key] = tuple(parts)
        elif key == "precompute":
            wanted = tuple(v.strip() for v in value.split(",") if v.strip() and v.strip() != "none")
            unknown = [v for v in wanted if v not in ("summaries", "embeddings")]
            if unknown:
                raise ConfigError(f"line {lineno}: unknown precompute target {unknown[0]!r}")
            params[key] = wanted
        else:
            raise ConfigError(f"line {lineno}: unknown configuration key {key!r}")
    if nodes_path is None or edges_path is None:
        raise ConfigError("configuration must name both nodes and edges files")
    if not dimension_files:
        raise ConfigError("configuration must list at least one dimension.<name> file")
    return BuildConfig(nodes_path, edges_path, dimension_files, params)


def load_build_config(path: str | Path) -> BuildConfig:
    path = Path(path)
    return parse_build_config(path.read_text(encoding="utf-8"), base_dir=path.parent)
