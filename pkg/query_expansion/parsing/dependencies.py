"""
Reading typed dependency parses written as 'relation(headWord-i, depWord-j)' lines.
"""

import logging
import os
import re
from collections import namedtuple

from query_expansion.exceptions import MalformedLineError

logger = logging.getLogger(__name__)

Word = namedtuple("Word", ["term", "position"])


class TypedDependency(namedtuple("TypedDependency", ["relation", "head", "dependent"])):
    """
    A grammatical relation between a head word and a dependent word. The dependent is None
    for bare relation-word rows such as prep_for(for-3, -).
    """
    __slots__ = ()

    def words(self):
        """ The words of the relation that are present. """
        return [w for w in (self.head, self.dependent) if w is not None]


# words may contain hyphens, so the position is the last '-<digits>' of each argument.
# copy nodes written as word-3' keep their position.
_DEPENDENCY = re.compile(
    r"^(?P<relation>[A-Za-z][A-Za-z_:]*)\("
    r"\s*(?P<head>.+?)-(?P<head_pos>\d+)'*\s*,"
    r"\s*(?:(?P<dep>.+?)-(?P<dep_pos>\d+)'*|-)\s*\)$"
)


def parse_dependency_line(line, line_number=1, path=None):
    """
    Parse a single dependency record.

    :param line: (str) e.g. 'amod(prisons-4, overcrowded-3)'
    :param line_number: (int) Line number used in error messages.
    :param path: (str) File name used in error messages.
    :returns: (TypedDependency) The parsed dependency.
    """
    match = _DEPENDENCY.match(line.strip())
    if not match:
        raise MalformedLineError(f"Cannot parse dependency '{line.strip()}'", line_number, path)

    head = Word(match.group("head"), int(match.group("head_pos")))
    dependent = None
    if match.group("dep") is not None:
        dependent = Word(match.group("dep"), int(match.group("dep_pos")))

    return TypedDependency(match.group("relation").lower(), head, dependent)


def parse_dependencies(parse_text, path=None):
    """
    Parse line-oriented typed dependency output. Blank lines are ignored and order is preserved.

    :param parse_text: (str) The parser output.
    :param path: (str) File name used in error messages.
    :returns: (list) List of TypedDependency.
    """
    dependencies = []
    for line_number, line in enumerate(parse_text.splitlines(), start=1):
        if not line.strip():
            continue
        dependencies.append(parse_dependency_line(line, line_number, path))
    return dependencies


def read_parse_file(path):
    """
    Read a file holding the parses of many queries. Each query starts with a '#qid <id>'
    header followed by its dependency lines.

    :param path: (str) Path to the parse file.
    :returns: (dict) Mapping of query id to list of TypedDependency.
    """
    path = os.path.expanduser(path)
    parses = {}
    query_id = None

    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped:
                continue

            if stripped.startswith("#qid"):
                parts = stripped.split()
                if len(parts) != 2:
                    raise MalformedLineError(f"Bad query header '{stripped}'", line_number, path)
                query_id = parts[1]
                parses.setdefault(query_id, [])
                continue

            if query_id is None:
                raise MalformedLineError("Dependency found before any '#qid' header", line_number, path)

            parses[query_id].append(parse_dependency_line(stripped, line_number, path))

    logger.info(f"Read parses for {len(parses)} queries from {path}")
    return parses
