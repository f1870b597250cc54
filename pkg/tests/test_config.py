import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modde.config import (
    CATEGORICAL,
    Configuration,
    default_lambda,
    load_configuration,
    parse_configuration,
    save_configuration,
)
from modde.exceptions import ConfigurationError, LogParseError


def test_default_lambda_values():
    assert default_lambda(5) == 8
    assert default_lambda(20) == 12
    assert Configuration().population_size(5) == 8


def test_defaults_are_first_domain_entries():
    c = Configuration()
    for name, domain in CATEGORICAL.items():
        assert getattr(c, name) == domain[0]
    assert (c.f, c.cr, c.lambda_) == (0.5, 0.5, None)
    assert c.non_default_fields() == []


@pytest.mark.parametrize(
    "kwargs",
    [dict(sampler="lhs"), dict(diffs=3), dict(f=2.5), dict(cr=-0.1), dict(lambda_=3),
     dict(lambda_=10.0), dict(opposition=1), dict(diffs=True)],
)
def test_invalid_fields_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        Configuration(**kwargs)


def test_text_round_trip(tmp_path):
    c = Configuration(sdis="toroidal", lambda_=40, f=0.7, archive=True, adapt_cr="jde")
    path = tmp_path / "c.cfg"
    save_configuration(c, path, header="hello\nworld")
    back = load_configuration(path)
    assert back == c
    assert back.digest() == c.digest()


def test_digest_ignores_int_float_spelling():
    assert Configuration(f=1).digest() == Configuration(f=1.0).digest()


def test_parse_accepts_hyphens_and_comments():
    c = parse_configuration("# tuned\nsdis = unif-resample\nlambda = auto\n")
    assert c.sdis == "unif_resample" and c.lambda_ is None


@pytest.mark.parametrize(
    "text, line",
    [("sampler = uniform\nbogus = 1\n", 2), ("f = 0.5\nf = 0.6\n", 2), ("lambda = many\n", 1),
     ("no equals sign\n", 1)],
)
def test_parse_errors_carry_line_number(text, line):
    with pytest.raises(LogParseError) as info:
        parse_configuration(text, source="x.cfg")
    assert info.value.line == line
    assert f"x.cfg:{line}" in str(info.value)


def test_parse_out_of_domain_value():
    with pytest.raises(LogParseError):
        parse_configuration("sdis = sideways\n")


config_strategy = st.builds(
    Configuration,
    **{name: st.sampled_from(domain) for name, domain in CATEGORICAL.items()},
    lambda_=st.one_of(st.none(), st.integers(4, 200)),
    f=st.floats(0.0, 2.0),
    cr=st.floats(0.0, 1.0),
)


@settings(max_examples=200, deadline=None)
@given(config_strategy)
def test_round_trip_property(c):
    back = parse_configuration(c.to_text())
    assert back == c
    assert back.digest() == c.digest()
