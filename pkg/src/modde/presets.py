"""Named configurations: common DE variants and single-module variants."""

from __future__ import annotations

from .config import CATEGORICAL, Configuration
from .exceptions import ConfigurationError

COMMON_VARIANTS = (
    "L-SHADE",
    "SHADE",
    "DAS1",
    "DAS2",
    "Qin1",
    "Qin2",
    "Qin3",
    "Qin4",
    "Gamperle1",
    "Gamperle2",
    "jDE",
)

SINGLE_MODULE_F = 0.7
SINGLE_MODULE_CR = 0.7


def _common_table(dim):
    shade = dict(base="target", ref="pbest", archive=True, adapt_f="shade", adapt_cr="shade")
    return {
        "L-SHADE": dict(shade, lambda_=18 * dim, lpsr=True),
        "SHADE": dict(shade, lambda_=10 * dim),
        "DAS1": dict(f=0.8, cr=0.9, lambda_=10 * dim),
        "DAS2": dict(base="target", ref="best", f=0.8, cr=0.9, lambda_=10 * dim),
        "Qin1": dict(f=0.9, cr=0.9, lambda_=50),
        "Qin2": dict(f=0.5, cr=0.3, lambda_=50),
        "Qin3": dict(ref="best", f=0.5, cr=0.3, lambda_=50),
        "Qin4": dict(ref="best", diffs=2, f=0.5, cr=0.3, lambda_=50),
        "Gamperle1": dict(ref="best", diffs=2, f=0.45, cr=0.4, lambda_=2 * dim),
        "Gamperle2": dict(ref="best", diffs=2, f=0.6, cr=0.9, lambda_=2 * dim),
        "jDE": dict(adapt_f="jde", adapt_cr="jde", lambda_=100),
    }


def _lookup(name):
    key = name.strip().lower().replace("_", "-")
    for known in COMMON_VARIANTS:
        if known.lower() == key:
            return known
    raise ConfigurationError(f"unknown preset {name!r}; choose from {', '.join(COMMON_VARIANTS)}")


def common_variant(name, dim):
    """One of the 11 hand-crafted variants for dimension ``dim``.

    Adaptive F/CR start from the default 0.5 before adaptation kicks in.
    """
    return Configuration(**_common_table(dim)[_lookup(name)])


def common_variants(dim):
    return {name: common_variant(name, dim) for name in COMMON_VARIANTS}


def single_module_variants(dim):
    """Every non-default module option enabled alone, with F=CR=0.7, lambda=10*D.

    Keys are ``"<field>=<option>"`` labels; there are exactly 30.
    """
    if dim < 2:
        raise ConfigurationError(f"dimension must be >= 2, got {dim}")
    base = dict(f=SINGLE_MODULE_F, cr=SINGLE_MODULE_CR, lambda_=10 * dim)
    variants = {}
    for name, domain in CATEGORICAL.items():
        for option in domain[1:]:
            label = f"{name}={str(option).lower()}"
            variants[label] = Configuration(**base, **{name: option})
    return variants


def single_module_baseline(dim):
    """Default modules with the single-module parameter overrides."""
    return Configuration(f=SINGLE_MODULE_F, cr=SINGLE_MODULE_CR, lambda_=10 * dim)


def portfolio(kind, dim):
    """Labelled configurations of a named portfolio."""
    if kind == "common":
        return common_variants(dim)
    if kind == "single_module":
        return single_module_variants(dim)
    if kind == "both":
        return {**common_variants(dim), **single_module_variants(dim)}
    raise ConfigurationError(f"unknown portfolio {kind!r}")


def resolve(name, dim):
    """Configuration for a CLI name: ``default``, a common variant or a single-module label."""
    if name.strip().lower() == "default":
        return Configuration()
    if "=" in name:
        variants = single_module_variants(dim)
        if name in variants:
            return variants[name]
        raise ConfigurationError(f"unknown single-module variant {name!r}")
    return common_variant(name, dim)
