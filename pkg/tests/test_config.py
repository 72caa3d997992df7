import pytest

from lawopt.config import ConfigError, RunConfig, load_config, parse_config


def test_defaults_validate():
    cfg = RunConfig()
    cfg.validate()
    lat = cfg.lattice()
    assert (lat.nx, lat.nt, lat.n_controls) == (1001, 100, 21)


def test_full_grid_override():
    lat = RunConfig(full_grid=True).lattice()
    assert (lat.nx, lat.nt, lat.n_controls) == (10001, 100, 41)


def test_parse_both_forms_and_comments():
    cfg = parse_config("problem = expectation_floor  # TC2\nalpha 0.5\n\n# comment\nfull_grid = yes\n"
                       "epsilons = 0.1, 0.2\n")
    assert cfg.problem == "expectation_floor"
    assert cfg.alpha == 0.5
    assert cfg.full_grid is True
    assert cfg.epsilons == (0.1, 0.2)


@pytest.mark.parametrize("text, line, fragment", [
    ("alpha = 0.4\ndt = 0\n", 2, "dt must be positive"),
    ("alpha = 0.4\n\ndt = -0.01\n", 3, "dt must be positive"),
    ("bogus = 1\n", 1, "unknown key"),
    ("alpha = 1\nalpha = 2\n", 2, "duplicate"),
    ("alpha = abc\n", 1, "bad value"),
    ("x0\n", 1, "expected"),
    ("problem = other\n", 1, "unknown problem"),
    ("max_outer = 1.5\n", 1, "bad value"),
    ("penalty_test = sometimes\n", 1, "penalty_test"),
])
def test_errors_are_line_anchored(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text, "run.cfg")
    assert info.value.line == line
    assert str(info.value).startswith(f"run.cfg:{line}: ")
    assert fragment in str(info.value)


def test_inconsistent_grid_is_config_error():
    with pytest.raises(ConfigError, match="integ"):
        parse_config("dt = 0.03\n")


@pytest.mark.parametrize("name", ["tc1", "tc2"])
def test_shipped_configs_load(name, request):
    root = request.config.rootpath
    cfg = load_config(root / "configs" / f"{name}.cfg")
    assert cfg.tolerance == 1e-5 and cfg.alpha == 0.4
