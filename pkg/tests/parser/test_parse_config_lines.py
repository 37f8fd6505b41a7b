import pytest

from ch_vorticity.parser import ParseError, parse_config_lines, read_config_file


def test_parse_simple():
    lines = ["grid.n = 512\n", "model.preset=sigma0"]
    result = parse_config_lines(lines)
    assert result == {"grid.n": "512", "model.preset": "sigma0"}


def test_parse_top_level_key():
    result = parse_config_lines(["mode = audit\n"])
    assert result == {"mode": "audit"}


def test_parse_comments():
    lines = ["# Comment\n", "grid.L = 40pi # Inline comment\n", "  # Another comment"]
    result = parse_config_lines(lines)
    assert result == {"grid.L": "40pi"}


def test_parse_empty_value_with_comment():
    result = parse_config_lines(["initial.center = # use the middle\n"])
    assert result == {"initial.center": ""}


def test_parse_hash_without_space_is_kept():
    result = parse_config_lines(["output.directory = runs/#1\n"])
    assert result == {"output.directory": "runs/#1"}


def test_parse_lists():
    result = parse_config_lines(["snapshots.times = 0.5, 1, 1.5\n", "sweep.model.A = 0, 0.5, 1\n"])
    assert result == {"snapshots.times": "0.5, 1, 1.5", "sweep.model.A": "0, 0.5, 1"}


def test_parse_quotes():
    lines = ["output.directory='runs/single quoted'\n", 'initial.file="data/with # hash.csv"\n']
    result = parse_config_lines(lines)
    assert result == {"output.directory": "runs/single quoted", "initial.file": "data/with # hash.csv"}


def test_parse_escaping():
    lines = ['output.directory="quote \\" here"\n', 'initial.file="backslash \\\\ here"\n']
    result = parse_config_lines(lines)
    assert result == {"output.directory": 'quote " here', "initial.file": "backslash \\ here"}


def test_parse_multiline_backslash():
    lines = ["audit.A_samples = 0, 1,\\\n", " 2,\\\n", " 3"]
    result = parse_config_lines(lines)
    assert result == {"audit.A_samples": "0, 1, 2, 3"}


def test_parse_blank_lines():
    result = parse_config_lines(["\n", "\n", "time.T_final = 5\n", "\n"])
    assert result == {"time.T_final": "5"}


def test_parse_empty():
    assert parse_config_lines([]) == {}


def test_parse_error_expected_assignment():
    lines = ["-invalid line\n"]
    with pytest.raises(ParseError, match="Expected `key = value` assignment"):
        parse_config_lines(lines)


def test_parse_error_expected_assignment_operator():
    lines = ["grid.n 512\n"]
    with pytest.raises(ParseError, match="Expected assignment operator"):
        parse_config_lines(lines)


def test_parse_error_unmatched_quote():
    lines = ['output.directory="unmatched\n']
    with pytest.raises(ParseError, match="Unmatched double quote"):
        parse_config_lines(lines)


def test_parse_error_unmatched_single_quote():
    lines = ["output.directory='unmatched\n"]
    with pytest.raises(ParseError, match="Unmatched single quote"):
        parse_config_lines(lines)


def test_parse_error_duplicate_key():
    lines = ["grid.n = 64\n", "grid.n = 128\n"]
    with pytest.raises(ParseError, match="Duplicate key 'grid.n'") as e:
        parse_config_lines(lines)

    assert e.value.line_num == 2


def test_parse_error_line_number():
    lines = ["grid.n = 64\n", "# comment\n", "oops\n"]
    with pytest.raises(ParseError, match="at line 3"):
        parse_config_lines(lines)


def test_read_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("model.preset = vorticity\nmodel.A = 1.5\n")

    assert read_config_file(path) == {"model.preset": "vorticity", "model.A": "1.5"}


def test_read_missing_config_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_config_file(tmp_path / "missing.cfg")
