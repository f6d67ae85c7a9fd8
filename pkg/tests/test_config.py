import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pparab.config import ConfigError, parse_config, render

MINIMAL_SOLVE = """
[experiment]
command = solve
p = 2
n = 1

[domain]
kind = cylinder
lo = -1
hi = 1
t0 = 0
t1 = 1

[grid]
h = 0.1

[constants]
datum = constant:1
"""


def test_minimal_solve_defaults_dt_to_cfl():
    cfg = parse_config(MINIMAL_SOLVE)
    assert cfg.grid["dt"] == pytest.approx(0.0045)
    assert cfg.out == "solve.csv" and cfg.seed == 0
    assert cfg.domain == {"kind": "cylinder", "lo": (-1.0,), "hi": (1.0,), "t0": 0.0, "t1": 1.0}


def test_p_equal_one_names_the_rule():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL_SOLVE.replace("p = 2", "p = 1"))
    assert any("1 < p" in e for e in exc.value.errors)


def test_petrovsky_c_beyond_inverse_e():
    text = """
[experiment]
command = probe-regularity
p = 2
n = 1
[domain]
kind = petrovsky
c = 0.5
[constants]
target = 0 0
"""
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    msg = " ".join(exc.value.errors)
    assert "c < 1/e" in msg and "log|log|t||" in msg
    assert parse_config(text.replace("c = 0.5", "c = 0.3")).domain["c"] == 0.3


def test_all_errors_collected():
    text = MINIMAL_SOLVE.replace("p = 2", "p = 1").replace("n = 1", "n = 0").replace("h = 0.1", "h = abc")
    text += "bogus = 3\n[extra]\nx = 1\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    errs = exc.value.errors
    for needle in ("1 < p", "n >= 1", "h: expected float", "unknown key 'bogus'", "unknown section [extra]"):
        assert any(needle in e for e in errs), needle


@pytest.mark.parametrize("text,needle", [
    ("[experiment]\np = 2\nn = 1\n", "missing required key 'command'"),
    ("[experiment]\ncommand = fly\np = 2\nn = 1\n", "unknown command"),
    ("[experiment\n", "malformed"),
    (MINIMAL_SOLVE.replace("kind = cylinder", "kind = torus"), "unknown kind"),
    (MINIMAL_SOLVE.replace("datum = constant:1", "datum = magic"), "expected constant:"),
    (MINIMAL_SOLVE.replace("lo = -1", "lo = -1 0"), "lo needs 1 entries"),
])
def test_specific_errors(text, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert any(needle in e for e in exc.value.errors), exc.value.errors


def test_overrides_apply_before_validation():
    cfg = parse_config(MINIMAL_SOLVE, {"experiment.p": "inf", "grid.h": "0.2"})
    assert math.isinf(cfg.p)
    assert cfg.grid["dt"] == pytest.approx(0.9 * 0.04 / 2)


# ------------------------------------------------------------ round trip

floats = st.floats(-10, 10, allow_nan=False).map(lambda v: round(v, 6))


@st.composite
def configs(draw):
    n = draw(st.integers(1, 3))
    p = draw(st.one_of(st.floats(1.01, 1e6), st.just(math.inf)))
    command = draw(st.sampled_from(["solve", "probe-regularity", "verify-barriers", "fundamental-limit",
                                    "sweep-p", "verify-solutions"]))
    lines = ["[experiment]", f"command = {command}", f"p = {p!r}", f"n = {n}",
             f"seed = {draw(st.integers(0, 99))}"]
    if command in ("solve", "probe-regularity", "sweep-p"):
        lo = [draw(st.floats(-5, -0.1)) for _ in range(n)]
        hi = [draw(st.floats(0.1, 5)) for _ in range(n)]
        t0 = draw(st.floats(-2, 0))
        lines += ["[domain]", "kind = cylinder", "lo = " + " ".join(map(repr, lo)), "hi = " + " ".join(map(repr, hi)),
                  f"t0 = {t0!r}", f"t1 = {t0 + draw(st.floats(0.1, 3))!r}"]
    if command in ("solve", "sweep-p"):
        lines += ["[grid]", f"h = {draw(st.floats(0.01, 0.5))!r}"]
    lines.append("[constants]")
    if command == "solve":
        lines.append(f"datum = constant:{draw(floats)!r}")
        lines.append(f"slices = {draw(st.integers(1, 9))}")
    elif command == "sweep-p":
        lines.append("datum = expression:x1^2 + t")
        lines.append("p_list = " + " ".join(repr(draw(st.floats(1.5, 1e4))) for _ in range(3)))
    elif command == "probe-regularity":
        lines.append("target = " + " ".join(repr(draw(floats)) for _ in range(n + 1)))
    elif command == "verify-barriers":
        lines.append(f"construction = {draw(st.sampled_from(['sphere', 'petrovsky', 'irregularity']))}")
        lines.append(f"k = {draw(st.floats(0.51, 0.99))!r}")
    elif command == "fundamental-limit":
        pts = "; ".join(" ".join(repr(draw(floats)) for _ in range(n)) + f" {draw(st.floats(0.1, 5))!r}"
                        for _ in range(draw(st.integers(1, 3))))
        lines.append(f"points = {pts}")
    return "\n".join(lines) + "\n"


@settings(max_examples=100)
@given(configs())
def test_round_trip(text):
    cfg = parse_config(text)
    again = parse_config(render(cfg))
    assert again == cfg
    assert render(again) == render(cfg)
