"""Module/parameter assignment for modular DE and its text serialization.

A configuration file is plain ``key = value`` text, one field per line,
``#`` starts a comment. Keys are the field names of :class:`Configuration`
(``lambda`` for the population size, ``auto`` selects the dimension
dependent default). Unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .exceptions import ConfigurationError, LogParseError

SAMPLERS = ("uniform", "gaussian", "sobol", "halton")
BASES = ("rand", "best", "target")
REFS = ("none", "pbest", "best", "rand")
DIFFS = (1, 2)
CROSSOVERS = ("bin", "exp")
SDIS = (
    "saturate",
    "none",
    "unif_resample",
    "cotn",
    "toroidal",
    "mirror",
    "hvb",
    "expc_target",
    "expc_center",
    "exps",
)
ADAPT_F = ("none", "shade", "shade_modified", "jde")
ADAPT_CR = ("none", "shade", "jde")
FLAGS = (False, True)

# categorical fields in declaration order; the first entry of every domain is the default
CATEGORICAL = {
    "sampler": SAMPLERS,
    "opposition": FLAGS,
    "base": BASES,
    "ref": REFS,
    "diffs": DIFFS,
    "weighted_f": FLAGS,
    "archive": FLAGS,
    "crossover": CROSSOVERS,
    "eigen_x": FLAGS,
    "sdis": SDIS,
    "adapt_f": ADAPT_F,
    "adapt_cr": ADAPT_CR,
    "lpsr": FLAGS,
    "caps": FLAGS,
}

LAMBDA_RANGE = (4, 200)
F_RANGE = (0.0, 2.0)
CR_RANGE = (0.0, 1.0)


def default_lambda(dim):
    """Default population size ``4 + floor(3 ln D)``."""
    if dim < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {dim}")
    return 4 + int(math.floor(3.0 * math.log(dim)))


@dataclass(frozen=True)
class Configuration:
    """Full module and parameter assignment of one DE variant.

    ``lambda_`` of ``None`` means the dimension-dependent default,
    resolved by :meth:`population_size`.
    """

    sampler: str = "uniform"
    opposition: bool = False
    base: str = "rand"
    ref: str = "none"
    diffs: int = 1
    weighted_f: bool = False
    archive: bool = False
    crossover: str = "bin"
    eigen_x: bool = False
    sdis: str = "saturate"
    adapt_f: str = "none"
    adapt_cr: str = "none"
    lpsr: bool = False
    caps: bool = False
    lambda_: int | None = None
    f: float = 0.5
    cr: float = 0.5

    def __post_init__(self):
        self.validate()
        # canonical float form keeps digests independent of how F/CR were spelled
        object.__setattr__(self, "f", float(self.f))
        object.__setattr__(self, "cr", float(self.cr))

    def validate(self):
        for name, domain in CATEGORICAL.items():
            value = getattr(self, name)
            # bool is an int subclass; keep 1/True and 2/True apart
            ok = any(value == d and type(value) is type(d) for d in domain)
            if not ok:
                raise ConfigurationError(f"{name}={value!r} not in {domain}")
        lam = self.lambda_
        if lam is not None:
            if isinstance(lam, bool) or not isinstance(lam, int):
                raise ConfigurationError(f"lambda must be an integer, got {lam!r}")
            if lam < LAMBDA_RANGE[0]:
                raise ConfigurationError(f"lambda must be >= {LAMBDA_RANGE[0]}, got {lam}")
        for name, (lo, hi) in (("f", F_RANGE), ("cr", CR_RANGE)):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigurationError(f"{name} must be a real number, got {value!r}")
            if not (lo <= value <= hi) or math.isnan(value):
                raise ConfigurationError(f"{name}={value} outside [{lo}, {hi}]")

    def population_size(self, dim):
        return default_lambda(dim) if self.lambda_ is None else self.lambda_

    def replace(self, **changes):
        if "lambda" in changes:
            changes["lambda_"] = changes.pop("lambda")
        return replace(self, **changes)

    def to_text(self):
        lines = []
        for fld in fields(self):
            key = "lambda" if fld.name == "lambda_" else fld.name
            lines.append(f"{key} = {_format_value(getattr(self, fld.name))}")
        return "\n".join(lines) + "\n"

    def digest(self):
        """Stable 12 hex digit identifier of the assignment."""
        return hashlib.sha256(self.to_text().encode("ascii")).hexdigest()[:12]

    def non_default_fields(self):
        default = Configuration()
        return [
            fld.name
            for fld in fields(self)
            if getattr(self, fld.name) != getattr(default, fld.name)
        ]


def _format_value(value):
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(key, raw):
    raw = raw.strip()
    if key == "lambda":
        if raw.lower() == "auto":
            return None
        return int(raw)
    if key in ("f", "cr"):
        return float(raw)
    domain = CATEGORICAL[key]
    if domain is FLAGS:
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if domain is DIFFS:
        return int(raw)
    return raw.replace("-", "_").lower()


def parse_configuration(text, source=None):
    """Parse ``key = value`` text into a :class:`Configuration`."""
    values = {}
    known = set(CATEGORICAL) | {"lambda", "f", "cr"}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise LogParseError(f"expected 'key = value', got {line!r}", source, lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in known:
            raise LogParseError(f"unknown configuration key {key!r}", source, lineno)
        if key in values:
            raise LogParseError(f"duplicate key {key!r}", source, lineno)
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise LogParseError(f"bad value for {key}: {exc}", source, lineno) from None
    if "lambda" in values:
        values["lambda_"] = values.pop("lambda")
    try:
        return Configuration(**values)
    except ConfigurationError as exc:
        raise LogParseError(str(exc), source) from None


def load_configuration(path):
    path = Path(path)
    return parse_configuration(path.read_text(), source=str(path))


def save_configuration(config, path, header=None):
    text = config.to_text()
    if header:
        text = "".join(f"# {line}\n" for line in header.splitlines()) + text
    Path(path).write_text(text)
