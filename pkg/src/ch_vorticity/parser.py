import re
from collections.abc import Iterable, Sequence
from enum import Enum
from pathlib import Path

# The state machine follows the envfile parser of poethepoet (MIT Licensed)
# Source: https://github.com/nat-n/poethepoet/blob/main/poethepoet/env/parse.py


class ParseError(ValueError):
    def __init__(self, issue: str, offset: int, lines: Iterable[str]):
        self.line_num, self.position = self._get_line_number(offset, lines)
        super().__init__(f"{issue} at line {self.line_num} position {self.position}.")

    def _get_line_number(self, position: int, lines: Iterable[str]):
        line_num = 1
        for line in lines:
            if len(line) > position:
                break
            line_num += 1
            position -= len(line)
        return line_num, position


class ParserState(Enum):
    # Scanning for a new `key = value` line
    SCAN_KEY = 0
    # In a value with no quoting
    SCAN_VALUE = 1
    # Inside single quotes
    IN_SINGLE_QUOTE = 2
    # Inside double quotes
    IN_DOUBLE_QUOTE = 3


KEY_PATTERN = r"^[ \t]*([a-zA-Z_][a-zA-Z_0-9]*(?:\.[a-zA-Z_][a-zA-Z_0-9]*)*)"
ASSIGNMENT_PATTERN = rf"{KEY_PATTERN}[ \t]*=[ \t]*"
BLANK_OR_COMMENT_PATTERN = r"^(?:[ \t]*(?:\#[^\n]*)?\n)*"
UNQUOTED_VALUE_PATTERN = r"^(.*?)(\n|[ \t]+\#|'|\"|\\+)"
SINGLE_QUOTE_VALUE_PATTERN = r"^((?:.|\n)*?)'"
DOUBLE_QUOTE_VALUE_PATTERN = r"^((?:.|\n)*?)(\"|\\+)"


def parse_config_lines(content_lines: Sequence[str]) -> dict[str, str]:
    """
    Parse flat `section.key = value` config text into a dict of raw strings, keyed by dotted name.

    A value runs to the end of its line. `#` starts a comment at the beginning of a line or after
    whitespace, outside of quotes.

    Escaping rules:
    - outside of quotes:
      - escaped new lines are omitted (line continuation)
      - other escaped characters are always included
      - non-escaped backslashes are omitted
    - inside single quotes
      - backslashes are treated like normal characters
    - inside double quotes
      - escaped new lines are omitted
      - escaped backslashes and double-quotes are kept
      - backslashes not used for escaping are kept

    Raises:
        ParseError: For a line that is not an assignment, an unmatched quote or a repeated key.
    """
    content = "".join(content_lines) + "\n"
    result: dict[str, str] = {}
    cursor = 0
    state = ParserState.SCAN_KEY
    key: str | None = None
    value_parts: list[str] = []

    def finish_value():
        nonlocal key, value_parts, state
        result[key] = "".join(value_parts).rstrip()
        key = None
        value_parts = []
        state = ParserState.SCAN_KEY

    while cursor < len(content):
        if state == ParserState.SCAN_KEY:
            cursor += re.match(BLANK_OR_COMMENT_PATTERN, content[cursor:]).end()

            if not content[cursor:].strip():
                break

            match = re.match(ASSIGNMENT_PATTERN, content[cursor:])

            if match is None:
                key_match = re.match(KEY_PATTERN, content[cursor:])
                if key_match:
                    cursor += key_match.end()
                    raise ParseError("Expected assignment operator '='", cursor, content_lines)

                raise ParseError("Expected `key = value` assignment", cursor, content_lines)

            key = match.group(1)

            if key in result:
                raise ParseError(f"Duplicate key '{key}'", cursor, content_lines)

            cursor += match.end()
            state = ParserState.SCAN_VALUE

        if state == ParserState.SCAN_VALUE:
            if not value_parts and content.startswith("#", cursor):
                # `key = # comment` assigns an empty value
                cursor = content.index("\n", cursor)
                finish_value()
                continue

            # collect up until the end of line, a comment, a quote, or a group of backslashes
            match = re.match(UNQUOTED_VALUE_PATTERN, content[cursor:])
            if not match:
                # Should not happen as we added a newline to the end
                break

            new_value, terminator = match.groups()
            value_parts.append(new_value)
            cursor += len(new_value)

            if terminator == "\n":
                cursor += 1
                finish_value()
                continue

            if terminator.lstrip(" \t") == "#":
                # skip the comment, keep the newline for the next scan
                cursor = content.index("\n", cursor)
                finish_value()
                continue

            if terminator == "'":
                cursor += 1
                state = ParserState.IN_SINGLE_QUOTE

            elif terminator == '"':
                cursor += 1
                state = ParserState.IN_DOUBLE_QUOTE

            else:
                # We found one or more backslashes
                num_backslashes = len(terminator)
                # Keep the excess (escaped) backslashes
                value_parts.append("\\" * (num_backslashes // 2))
                cursor += num_backslashes

                if num_backslashes % 2 != 0 and cursor < len(content):
                    next_char = content[cursor]
                    cursor += 1

                    if next_char == "\n":
                        # Omit escaped new line
                        continue

                    value_parts.append(next_char)
                continue

        if state == ParserState.IN_SINGLE_QUOTE:
            match = re.search(SINGLE_QUOTE_VALUE_PATTERN, content[cursor:], re.MULTILINE)
            if match is None:
                raise ParseError("Unmatched single quote", cursor, content_lines)
            value_parts.append(match.group(1))
            cursor += match.end()
            state = ParserState.SCAN_VALUE
            continue

        if state == ParserState.IN_DOUBLE_QUOTE:
            match = re.search(DOUBLE_QUOTE_VALUE_PATTERN, content[cursor:], re.MULTILINE)
            if match is None:
                raise ParseError("Unmatched double quote", cursor, content_lines)
            new_value, backslashes_or_dquote = match.groups()
            value_parts.append(new_value)
            cursor += match.end()

            if backslashes_or_dquote == '"':
                state = ParserState.SCAN_VALUE
                continue

            num_backslashes = len(backslashes_or_dquote)
            value_parts.append("\\" * (num_backslashes // 2))

            if num_backslashes % 2 != 0 and cursor < len(content):
                # Odd number of backslashes maybe an escape sequence
                next_char = content[cursor]
                cursor += 1
                if next_char == "\n":
                    pass
                elif next_char == '"':
                    value_parts.append(next_char)
                else:
                    value_parts.append("\\" + next_char)

    return result


def read_config_file(path: str | Path) -> dict[str, str]:
    """
    Read and parse a config file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ParseError: If the text is malformed.
    """
    with Path(path).open(encoding="utf-8") as f:
        content_lines = f.readlines()

    return parse_config_lines(content_lines)
