"""Per-criterion outcomes collected by test_acceptance, printed by conftest."""

RESULTS: dict[int, list[tuple[bool, str]]] = {}


def record(number: int, passed: bool, detail: str) -> bool:
    RESULTS.setdefault(number, []).append((bool(passed), detail))
    return passed
