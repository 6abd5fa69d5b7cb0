import numpy as np
import pytest

from fairscore import Dataset, FairnessConstraint

# Six real-estate agents over two normalized scoring attributes; the
# location column is the sensitive attribute. Frozen here because several
# oracles and the acceptance suite all sweep exactly this data.
EXAMPLE1_ROWS = [
    ("t1", 0.63, 0.71, "Detroit"),
    ("t2", 0.72, 0.65, "Chicago"),
    ("t3", 0.58, 0.78, "Detroit"),
    ("t4", 0.70, 0.68, "Chicago"),
    ("t5", 0.53, 0.82, "Detroit"),
    ("t6", 0.61, 0.79, "Chicago"),
]

EXAMPLE1_CSV = "id,x1,x2,location\n" + "\n".join(
    f"{rid},{x1},{x2},{loc}" for rid, x1, x2, loc in EXAMPLE1_ROWS
) + "\n"


def make_example1() -> Dataset:
    return Dataset.from_matrix(
        [[x1, x2] for _, x1, x2, _ in EXAMPLE1_ROWS],
        ids=[rid for rid, *_ in EXAMPLE1_ROWS],
        groups=[loc for *_, loc in EXAMPLE1_ROWS],
        attribute_names=["x1", "x2"],
        sensitive_attribute="location",
    )


@pytest.fixture
def example1() -> Dataset:
    return make_example1()


@pytest.fixture
def detroit_top3() -> list[FairnessConstraint]:
    return [FairnessConstraint(group="Detroit", k=3, min_count=1)]


@pytest.fixture
def example1_csv(tmp_path):
    path = tmp_path / "example1.csv"
    path.write_text(EXAMPLE1_CSV)
    return path


def make_synthetic(n: int, d: int, seed: int, groups=("A", "B")) -> Dataset:
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(0.0, 1.0, size=(n, d))
    labels = [groups[i] for i in rng.integers(0, len(groups), size=n)]
    return Dataset.from_matrix(
        matrix,
        ids=[f"t{i + 1}" for i in range(n)],
        groups=labels,
        sensitive_attribute="group",
    )
