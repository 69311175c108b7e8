"""
Run configuration: a line-oriented ``key = value`` file with ``[section]``
headers and ``#`` comments.

    [run]
    dimension = 2
    k = 2
    lambda = 1.0

    [field]
    name = tangential2d
    c = 1.0

Required keys are ``run.dimension``, ``run.k`` and ``field.name``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MagscatError

FIELD_NAMES = ("radial", "tangential2d", "harmonic3d", "custom")

# key -> (type, default); None marks a required key, ... a default derived later
SCHEMA = {
    "run": {
        "dimension": (int, None),
        "k": (int, None),
        "lambda": (float, 1.0),
        "panels": (int, 64),
        "points": (int, 10),
        "radius": (float, 1.0),
        "output": (str, ""),
        "forcing": (str, "field"),
        "forcing_value": (float, 1.0),
        "levels": (int, ...),
    },
    "field": {
        "name": (str, None),
        "c": (float, 1.0),
        "f": (float, 1.0),
        "l": (int, 1),
        "m": (int, 0),
        "variant": (str, "grad"),
        "project": (bool, False),
    },
    "grid": {
        "omegas": (int, 16),
        "tangents": (int, ...),
        "s_points": (int, 63),
        "thetas": (int, 1),
    },
    "inversion": {
        "max_degree": (int, 2),
        "ridge": (float, 0.0),
        "geodesics": (int, 200),
        "noise": (float, 0.0),
    },
}


class ConfigError(MagscatError, ValueError):
    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    dimension: int
    k: int
    lam: float = 1.0
    panels: int = 64
    points: int = 10
    radius: float = 1.0
    output: str = ""
    forcing: str = "field"
    forcing_value: float = 1.0
    levels: int = 1
    field_name: str = "tangential2d"
    field_params: dict = field(default_factory=dict)
    omegas: int = 16
    tangents: int = 1
    s_points: int = 63
    thetas: int = 1
    max_degree: int = 2
    ridge: float = 0.0
    geodesics: int = 200
    noise: float = 0.0


def _convert(kind, text, key, line):
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if kind is str:
            if not text:
                raise ValueError(text)
            return text
        return kind(text)
    except ValueError:
        raise ConfigError(f"malformed value {text!r} for key {key!r} (expected {kind.__name__})", line) from None


def parse_config(text: str) -> RunConfig:
    raw: dict[tuple[str, str], tuple[str, int]] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError(f"malformed section header {stripped!r}", lineno)
            section = stripped[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", lineno)
        key, value = (p.strip() for p in stripped.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        custom = section == "field" and key.startswith("component_")
        if key not in SCHEMA[section] and not custom:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno)
        if (section, key) in raw:
            first = raw[(section, key)][1]
            raise ConfigError(f"duplicate key {key!r} in [{section}] (lines {first} and {lineno})", lineno)
        raw[(section, key)] = (value, lineno)

    values: dict[tuple[str, str], object] = {}
    for sec, keys in SCHEMA.items():
        for key, (kind, default) in keys.items():
            if (sec, key) in raw:
                text_value, lineno = raw[(sec, key)]
                values[(sec, key)] = _convert(kind, text_value, key, lineno)
            elif default is None:
                raise ConfigError(f"missing required key {key!r} in [{sec}]")
            else:
                values[(sec, key)] = default

    def line_of(sec, key):
        return raw.get((sec, key), (None, None))[1]

    n = values[("run", "dimension")]
    k = values[("run", "k")]
    if n < 2:
        raise ConfigError("dimension must be >= 2", line_of("run", "dimension"))
    if k < 2:
        raise ConfigError(
            f"k = {k} is not allowed: the symbol theorem requires the potential difference "
            "to be of order -k with k >= 2",
            line_of("run", "k"),
        )
    lam = values[("run", "lambda")]
    if not lam > 0:
        raise ConfigError("lambda must be positive", line_of("run", "lambda"))
    if not values[("run", "radius")] > 0:
        raise ConfigError("radius must be positive", line_of("run", "radius"))
    if values[("inversion", "ridge")] < 0:
        raise ConfigError("ridge must be non-negative", line_of("inversion", "ridge"))
    if values[("inversion", "max_degree")] < 0:
        raise ConfigError("max_degree must be >= 0", line_of("inversion", "max_degree"))
    if values[("inversion", "noise")] < 0:
        raise ConfigError("noise must be non-negative", line_of("inversion", "noise"))

    forcing = values[("run", "forcing")]
    if forcing not in ("field", "constant"):
        raise ConfigError(f"forcing must be 'field' or 'constant', got {forcing!r}", line_of("run", "forcing"))
    if values[("run", "levels")] is ...:
        values[("run", "levels")] = k - 1 if forcing == "field" else 3
    if values[("grid", "tangents")] is ...:
        values[("grid", "tangents")] = 1 if n == 2 else 4
    for sec, key in (("run", "panels"), ("run", "points"), ("run", "levels"), ("grid", "omegas"),
                     ("grid", "tangents"), ("grid", "s_points"), ("grid", "thetas"), ("inversion", "geodesics")):
        if values[(sec, key)] < 1:
            raise ConfigError(f"{key} must be >= 1", line_of(sec, key))
    if n == 2:
        for key in ("tangents", "thetas"):
            if values[("grid", key)] > 2:
                raise ConfigError(f"{key} must be 1 or 2 in dimension 2", line_of("grid", key))
    if forcing == "field" and values[("run", "levels")] != k - 1:
        raise ConfigError("with forcing = field the cascade has exactly k - 1 levels", line_of("run", "levels"))

    name = values[("field", "name")]
    if name not in FIELD_NAMES:
        raise ConfigError(f"unknown field {name!r}; known fields: {', '.join(FIELD_NAMES)}", line_of("field", "name"))
    params = {key: values[("field", key)] for key in ("c", "f", "l", "m", "variant", "project")}
    if name == "tangential2d" and n != 2:
        raise ConfigError("tangential2d needs dimension = 2", line_of("field", "name"))
    if name == "harmonic3d":
        if n != 3:
            raise ConfigError("harmonic3d needs dimension = 3", line_of("field", "name"))
        if params["l"] < 1 or abs(params["m"]) > params["l"]:
            raise ConfigError("harmonic3d needs l >= 1 and |m| <= l", line_of("field", "l"))
        if params["variant"] not in ("grad", "rot"):
            raise ConfigError("harmonic3d variant must be 'grad' or 'rot'", line_of("field", "variant"))
    components = {key: v for (sec, key), v in raw.items() if sec == "field" and key.startswith("component_")}
    if name == "custom":
        expected = [f"component_{i}" for i in range(1, n + 1)]
        extra = sorted(set(components) - set(expected))
        if extra:
            raise ConfigError(f"unexpected custom component key {extra[0]!r}", components[extra[0]][1])
        missing = [key for key in expected if key not in components]
        if missing:
            raise ConfigError(f"custom field is missing {missing[0]!r}")
        params["components"] = tuple(components[key][0] for key in expected)
    elif components:
        first = min(components.values(), key=lambda v: v[1])
        raise ConfigError("component_* keys are only valid for the custom field", first[1])

    return RunConfig(
        dimension=n,
        k=k,
        lam=lam,
        panels=values[("run", "panels")],
        points=values[("run", "points")],
        radius=values[("run", "radius")],
        output=values[("run", "output")],
        forcing=forcing,
        forcing_value=values[("run", "forcing_value")],
        levels=values[("run", "levels")],
        field_name=name,
        field_params=params,
        omegas=values[("grid", "omegas")],
        tangents=values[("grid", "tangents")],
        s_points=values[("grid", "s_points")],
        thetas=values[("grid", "thetas")],
        max_degree=values[("inversion", "max_degree")],
        ridge=values[("inversion", "ridge")],
        geodesics=values[("inversion", "geodesics")],
        noise=values[("inversion", "noise")],
    )


def build_field(config: RunConfig):
    """The configured one-form, homogeneous of degree -k."""
    from . import fields, inversion

    n, k, p = config.dimension, config.k, config.field_params
    name = config.field_name
    if name == "radial":
        form = fields.radial(n, p["f"], -k)
    elif name == "tangential2d":
        form = fields.tangential2d(p["c"], -k)
    elif name == "harmonic3d":
        form = inversion.harmonic_form(p["l"], p["m"], p["variant"], -k)
    else:
        form = fields.polynomial_form(n, p["components"], -k)
    if p.get("project"):
        form = fields.aradial_project(form)
    return form
