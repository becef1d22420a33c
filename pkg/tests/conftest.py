import numpy as np
import pytest

from policyteach import builtin_domain
from policyteach.domains import domain_from_dict


@pytest.fixture(scope="session")
def delivery():
    return builtin_domain("delivery")


@pytest.fixture(scope="session")
def tiles():
    return builtin_domain("tiles")


@pytest.fixture(scope="session")
def skateboard():
    return builtin_domain("skateboard")


def delivery_like(envs, weights=(-3.0, 3.5, -1.0), name="mini", discount=1.0):
    """A small domain with the mud/recharge/action feature model, for tests
    that need a specific layout rather than the full built-in roster."""
    return domain_from_dict(
        {
            "name": name,
            "discount": discount,
            "flags": ["recharged"],
            "features": [
                {"name": "mud", "trigger": {"kind": "exit", "cell": "mud"}},
                {
                    "name": "recharge",
                    "trigger": {
                        "kind": "enter_once",
                        "cell": "recharge",
                        "flag": "recharged",
                    },
                },
                {"name": "action", "trigger": {"kind": "action"}},
            ],
            "weights": list(weights),
            "environments": envs,
        }
    )


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def has_normal(cs, direction, tol=1e-9):
    """True when the constraint set contains a normal proportional to
    `direction` (same orientation)."""
    target = unit(direction)
    return any(abs(float(n @ target) - 1.0) <= tol for n in cs.normals)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_record(request):
    def record(line: str):
        lines = getattr(request.config, "_acceptance_lines", None)
        if lines is None:
            lines = []
            request.config._acceptance_lines = lines
        lines.append(line)

    return record
