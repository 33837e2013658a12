"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

RESULTS: list[str] = []


def record(number: int, ok: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return line
