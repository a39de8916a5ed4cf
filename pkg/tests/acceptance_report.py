"""Collects one result line per acceptance criterion for the terminal summary."""

_RESULTS = {}


def record(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    _RESULTS[number] = line
    print(line)
    return passed


def lines():
    return [_RESULTS[k] for k in sorted(_RESULTS)]
