"""Declarative job configuration (JSON, schema version 1).

Complex numbers are written as ``[re, im]`` or a bare real number.  Example::

    {
      "schema_version": 1,
      "command": "invertible",
      "element": {
        "scalar": 0,
        "terms": [
          {"order": "TD",
           "toeplitz": {"kind": "trig", "coefficients": [[1, 1.0, 0.0]]},
           "multiplier": {"kind": "constant", "value": 1}}
        ]
      },
      "parameters": {"lambdas": [[0, 0], [2, 0]]}
    }
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .algebra import PsiElement
from .composition import QuasiParabolicMap
from .errors import ConfigError, HardyPsiError
from .symbols import (
    CircleSymbol,
    LineSymbol,
    complex_exp,
    constant_multiplier,
    exp_decay,
    piecewise_linear,
    poly_exp,
    trig_polynomial,
)

SCHEMA_VERSION = 1
COMMANDS = ("essential-spectrum", "spectrum", "index", "invertible", "homotopy-trace",
            "compose", "validate")

DEFAULT_PARAMETERS = {
    "N": 64,
    "resolution": 256,
    "sigma_resolution": 1e-3,
    "lambdas": [],
    "w_grid": [i / 10 for i in range(11)],
    "bounding_box": None,
    "emit_matrices": False,
    "seed": 0,
    "random_elements": 100,
    "homotopy_elements": 25,
}


def parse_complex(value, where="value"):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number or [re, im], got a boolean")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"{where}: expected a number or [re, im], got {value!r}")


def _require(spec, key, where):
    if not isinstance(spec, dict) or key not in spec:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return spec[key]


def parse_line_symbol(spec, where="toeplitz"):
    kind = _require(spec, "kind", where)
    if kind == "trig":
        rows = _require(spec, "coefficients", where)
        try:
            terms = [(int(k), float(re), float(im)) for k, re, im in rows]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: coefficients must be [k, re, im] rows") from exc
        return LineSymbol.from_circle(trig_polynomial(terms))
    if kind == "rational":
        c = parse_complex(spec.get("constant", 0), f"{where}.constant")
        poles = [parse_complex(d, f"{where}.poles") for d in spec.get("poles", [])]
        return LineSymbol.rational(c, poles)
    if kind == "constant":
        return LineSymbol.constant(parse_complex(_require(spec, "value", where), where))
    raise ConfigError(f"{where}: unknown toeplitz symbol kind {kind!r}")


def parse_multiplier(spec, where="multiplier"):
    kind = _require(spec, "kind", where)
    if kind == "constant":
        m = constant_multiplier(parse_complex(_require(spec, "value", where), where))
    elif kind == "exp_decay":
        m = exp_decay(float(_require(spec, "alpha", where)),
                      scale=parse_complex(spec.get("scale", 1.0), f"{where}.scale"),
                      limit=parse_complex(spec.get("limit", 0.0), f"{where}.limit"))
    elif kind == "complex_exp":
        m = complex_exp(parse_complex(_require(spec, "c", where), f"{where}.c"))
    elif kind == "piecewise_linear":
        rows = _require(spec, "knots", where)
        try:
            knots = [(float(t), complex(float(re), float(im))) for t, re, im in rows]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: knots must be [t, re, im] rows") from exc
        m = piecewise_linear(knots)
    elif kind == "poly_exp":
        m = poly_exp(int(_require(spec, "n", where)), float(_require(spec, "alpha", where)),
                     coefficient=parse_complex(spec.get("coefficient", 1.0), where))
    else:
        raise ConfigError(f"{where}: unknown multiplier kind {kind!r}")
    if "declared_limit" in spec:
        declared = parse_complex(spec["declared_limit"], f"{where}.declared_limit")
        if abs(declared - m.limit_at_infinity) > 1e-12:
            from .errors import SymbolClassError

            raise SymbolClassError(
                f"{where}: declared limit {declared} differs from the closed form's limit "
                f"{m.limit_at_infinity}")
    return m


def parse_element(spec):
    if not isinstance(spec, dict):
        raise ConfigError("element: expected an object")
    td, dt = [], []
    for i, term in enumerate(spec.get("terms", [])):
        where = f"element.terms[{i}]"
        order = str(term.get("order", "TD")).upper()
        phi = parse_line_symbol(_require(term, "toeplitz", where), where + ".toeplitz")
        theta = parse_multiplier(_require(term, "multiplier", where), where + ".multiplier")
        if order == "TD":
            td.append((phi, theta))
        elif order == "DT":
            dt.append((theta, phi))
        else:
            raise ConfigError(f"{where}: order must be 'TD' or 'DT'")
    return PsiElement(tuple(td), tuple(dt), parse_complex(spec.get("scalar", 0), "scalar"),
                      float(spec.get("tail_bound", 0.0)))


def parse_map(spec):
    if not isinstance(spec, dict):
        raise ConfigError("map: expected an object")
    psi = _require(spec, "psi", "map")
    c = parse_complex(psi.get("constant", 0), "map.psi.constant")
    poles = [parse_complex(d, "map.psi.poles") for d in psi.get("poles", [])]
    alpha = spec.get("alpha")
    n_max = spec.get("n_max")
    return QuasiParabolicMap(c, tuple(poles), epsilon=float(spec.get("epsilon", 1e-3)),
                             alpha=None if alpha is None else float(alpha),
                             n_max=None if n_max is None else int(n_max))


@dataclass
class JobConfig:
    command: str
    element: PsiElement | None = None
    qmap: QuasiParabolicMap | None = None
    parameters: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def lambdas(self):
        return [parse_complex(v, "parameters.lambdas") for v in self.parameters["lambdas"]]

    def subject(self):
        """The element to analyse: the explicit element, or the series of the map."""
        if self.element is not None:
            return self.element
        if self.qmap is not None:
            from .composition import series_element

            return series_element(self.qmap)
        raise ConfigError(f"command {self.command!r} needs an 'element' or a 'map'")


def _check_parameters(p):
    if not isinstance(p["N"], int) or not 1 <= p["N"] <= 2048:
        raise ConfigError("parameters.N must be an integer in [1, 2048]")
    if not isinstance(p["resolution"], int) or not 8 <= p["resolution"] <= 4096:
        raise ConfigError("parameters.resolution must be an integer in [8, 4096]")
    if not 0 < float(p["sigma_resolution"]) <= 0.1:
        raise ConfigError("parameters.sigma_resolution must lie in (0, 0.1]")
    for w in p["w_grid"]:
        if not 0 <= float(w) <= 1:
            raise ConfigError("parameters.w_grid values must lie in [0, 1]")
    box = p["bounding_box"]
    if box is not None and (len(box) != 4 or box[0] >= box[1] or box[2] >= box[3]):
        raise ConfigError("parameters.bounding_box must be [xmin, xmax, ymin, ymax]")


def load_config(source, command=None, overrides=None):
    """Parse a config file path, JSON text or dict into a :class:`JobConfig`."""
    if isinstance(source, dict):
        raw = source
    else:
        text = Path(source).read_text() if not str(source).lstrip().startswith("{") else source
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}")
    cmd = command or raw.get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}; got {cmd!r}")
    params = dict(DEFAULT_PARAMETERS)
    params.update(raw.get("parameters", {}) or {})
    for k, v in (overrides or {}).items():
        if v is not None:
            params[k] = v
    _check_parameters(params)
    try:
        element = parse_element(raw["element"]) if "element" in raw else None
        qmap = parse_map(raw["map"]) if "map" in raw else None
    except HardyPsiError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"malformed symbol declaration: {exc}") from exc
    if element is not None and qmap is not None:
        raise ConfigError("declare either 'element' or 'map', not both")
    job = JobConfig(cmd, element, qmap, params, raw)
    job.lambdas  # validate early
    return job


def circle_symbol_from_rows(rows):
    return CircleSymbol({int(k): complex(re, im) for k, re, im in rows})
