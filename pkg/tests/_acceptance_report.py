"""Collects acceptance-check verdict lines for the end-of-run summary.

pytest captures per-test stdout, so the acceptance tests record their
verdicts here and conftest prints them from the terminal-summary hook,
where output is never swallowed.
"""

LINES: list[str] = []


def record(index: int, total: int, title: str, ok: bool, detail: str) -> None:
    verdict = "PASS" if ok else "FAIL"
    LINES.append(f"{verdict} acceptance {index}/{total} ({title}): {detail}")
