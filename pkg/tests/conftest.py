import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# random composite fields over z1, z2, built so every log/sqrt argument stays real and positive
_LEAVES = ["z1", "z2", "conj(z1)", "conj(z2)", "0.5", "1.3", "re(z1)", "im(z2)"]


def random_expression(rng: np.random.Generator, depth: int = 3) -> str:
    if depth == 0 or rng.random() < 0.2:
        return str(rng.choice(_LEAVES))
    kind = int(rng.integers(0, 8))
    a = random_expression(rng, depth - 1)
    b = random_expression(rng, depth - 1)
    if kind == 0:
        return f"({a} + {b})"
    if kind == 1:
        return f"({a} - {b})"
    if kind == 2:
        return f"({a} * {b})"
    if kind == 3:
        return f"({a}) / (1.5 + abs2({b}))"
    if kind == 4:
        return f"exp(re({a}) / (1 + abs2({a})))"
    if kind == 5:
        return f"log(1 + abs2({a}))"
    if kind == 6:
        return f"sqrt(2 + re({a})^2)"
    return f"({a})^2"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
