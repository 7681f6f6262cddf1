"""Reproducible file output and flat key=value config handling.

Every emitted file starts with a header block (comment rows in CSV, a
"config" object in JSON) that records the full effective configuration and
seed.  Re-running with that header as a config file reproduces the file
byte for byte, so headers never contain timestamps, host names or worker
counts.

CSV dialect: comma separator, '.' decimal point, one header row, LF line
endings.  JSON: UTF-8, keys in insertion order (fixed by the writers).
"""

from __future__ import annotations

import json
import os
from typing import Iterable

from . import __version__

__all__ = [
    "format_value",
    "header_lines",
    "write_csv",
    "write_json",
    "parse_config_file",
    "dump_config_file",
]


def format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def header_lines(config: dict) -> list[str]:
    lines = [f"# combwalk_version = {__version__}"]
    for key in sorted(config):
        lines.append(f"# {key} = {format_value(config[key])}")
    return lines


def write_csv(path, columns: list[str], rows: Iterable[Iterable],
              config: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if config is not None:
            for line in header_lines(config):
                fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


class CsvStream:
    """Row-at-a-time CSV writer that flushes after every row."""

    def __init__(self, path, columns, config=None):
        self._fh = open(path, "w", encoding="utf-8", newline="\n")
        if config is not None:
            for line in header_lines(config):
                self._fh.write(line + "\n")
        self._fh.write(",".join(columns) + "\n")
        self._fh.flush()

    def write_row(self, row):
        self._fh.write(",".join(format_value(v) for v in row) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_json(path, payload: dict, config: dict | None = None) -> None:
    body = dict(payload)
    if config is not None:
        body = {"combwalk_version": __version__, "config": config, **body}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(body, fh, indent=2, sort_keys=False)
        fh.write("\n")


def parse_config_file(path) -> dict:
    """Flat key = value text; '#' starts a comment, header rows included.

    Values stay strings; the CLI coerces them per flag.  A header block
    written by this package parses back unchanged, so an emitted CSV can be
    passed straight back as --config: parsing stops at the first
    non-comment line without an '=', i.e. at the column row.
    """
    out = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                line = line[1:].strip()
                if "=" not in line:
                    continue
            if "=" not in line:
                break
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    out.pop("combwalk_version", None)
    return out


def dump_config_file(path, config: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(config):
            fh.write(f"{key} = {format_value(config[key])}\n")


def ensure_outdir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
