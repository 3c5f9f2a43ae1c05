"""Flat ``key = value`` scenario files.

Grammar, one entry per line::

    # comment (also after a value)
    mode = wcs
    source.delta = 0.063          # both parties; alice./bob. keys override it
    alice.delta1 = 0.1
    channel.distance = 100
    sweep.variable = channel.distance
    sweep.from = 0
    sweep.to = 300
    sweep.steps = 31
    optimize = false

Keys are case-sensitive and may appear once.  Parameter keys are those of
:data:`rfimdi.pipeline.DEFAULTS` plus the aliases accepted by
:func:`rfimdi.pipeline.expand_key`.
"""

from .errors import DomainError
from .pipeline import Scenario, Sweep, expand_key

_SWEEP_FIELDS = ("variable", "from", "to", "steps")
_INT_KEYS = ("decoy.n_cut",)


def _parse_bool(v):
    low = v.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise DomainError(f"not a boolean: {v!r}")


def parse_entries(text):
    """Ordered ``{key: raw string}`` from config text."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise DomainError(f"line {lineno}: expected 'key = value'")
        if key in entries:
            raise DomainError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def _number(key, value):
    try:
        return int(value) if key in _INT_KEYS else float(value)
    except ValueError:
        raise DomainError(f"{key}: not a number: {value!r}") from None


def _sweep(entries, prefix):
    given = {f: entries.pop(f"{prefix}.{f}") for f in _SWEEP_FIELDS if f"{prefix}.{f}" in entries}
    if not given:
        return None
    missing = [f for f in _SWEEP_FIELDS if f not in given]
    if missing:
        raise DomainError(f"{prefix} is missing {', '.join(missing)}")
    try:
        steps = int(given["steps"])
        start, stop = float(given["from"]), float(given["to"])
    except ValueError:
        raise DomainError(f"{prefix}: from/to/steps must be numbers") from None
    return Sweep(given["variable"], start, stop, steps)


def scenario_from_text(text, mode=None):
    """Build a :class:`Scenario`; ``mode`` overrides the file's ``mode``."""
    entries = parse_entries(text)
    file_mode = entries.pop("mode", "wcs")
    optimize = _parse_bool(entries.pop("optimize", "false"))
    sweep = _sweep(entries, "sweep")
    sweep2 = _sweep(entries, "sweep2")
    # shared source.* keys first so per-party keys override them
    ordered = sorted(entries, key=lambda k: not k.startswith("source."))
    params = {}
    for key in ordered:
        expand_key(key)
        params[key] = _number(key, entries[key])
    return Scenario(mode or file_mode, params, sweep, sweep2, optimize)


def load_scenario(path, mode=None):
    with open(path) as fh:
        return scenario_from_text(fh.read(), mode)
