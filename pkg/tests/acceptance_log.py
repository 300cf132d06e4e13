"""Collects one pass/fail line per acceptance criterion for the run summary."""

RESULTS: dict[int, tuple[bool, str]] = {}


def record(number: int, ok: bool, detail: str) -> str:
    RESULTS[number] = (bool(ok), detail)
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    return line
