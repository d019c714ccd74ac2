"""Threshold and reference-value fixtures for the theorem harnesses.

The limit theorems come with no finite-n constants, so pass/fail bounds are
engineering choices frozen from baseline runs.  The fixtures file is flat
`key = value` text with `#` comments.  Keys are dotted ids; entries whose
key starts with `ref.` are frozen reference values for regression-style
comparisons, all other entries are upper thresholds: a harness check passes
when the observed value is <= the fixture value.

Resolution order for the file: explicit path argument, the
EDGEWORTH_FIXTURES environment variable, then the packaged defaults.
"""

from __future__ import annotations

import math
import os
from importlib import resources

ENV_VAR = "EDGEWORTH_FIXTURES"


def default_path() -> str:
    return str(resources.files("edgeworth").joinpath("data/fixtures.txt"))


def resolve_path(path=None) -> str:
    if path is not None:
        return str(path)
    env = os.environ.get(ENV_VAR)
    if env:
        return env
    return default_path()


def load_fixtures(path=None) -> dict:
    """Parse `key = value` lines; values are floats (inf allowed)."""
    fname = resolve_path(path)
    out: dict = {}
    with open(fname, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{fname}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = float(value.strip())
    return out


def save_fixtures(entries: dict, path, header: str = ""):
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for key in sorted(entries):
            fh.write(f"{key} = {entries[key]:.17g}\n")


def apply_fixtures(report, fixtures: dict, prefix: str | None = None):
    """Set report.passed by comparing checks against fixture thresholds.

    Every fixture entry `<prefix>.<check>` is an upper bound for the check
    of that name.  Raises KeyError when no fixture entry matches the report
    (pass/fail was requested but no baseline exists for this combination).
    """
    prefix = prefix if prefix is not None else report.fixture_prefix
    thresholds = {}
    for check in report.checks:
        key = f"{prefix}.{check}"
        if key in fixtures:
            thresholds[check] = fixtures[key]
    if not thresholds:
        raise KeyError(f"no fixture thresholds found under prefix {prefix!r}")
    passed = True
    for check, bound in thresholds.items():
        value = report.checks[check]
        if not (value <= bound) or math.isnan(value):
            passed = False
    report.thresholds = thresholds
    report.passed = passed
    return report


def match_significant(value: float, reference: float, digits: int) -> bool:
    """True when `value` rounds to `reference` at `digits` significant digits."""
    if reference == 0:
        return abs(value) < 10.0 ** (-digits)
    scale = 10.0 ** (digits - 1 - math.floor(math.log10(abs(reference))))
    return round(value * scale) == round(reference * scale)
