import pytest

from multidendro import parse_matrix

# four individuals, two tied shortest distances that chain x1-x2-x3
TOY_TEXT = """\
0 2 4 7
2 0 2 5
4 2 0 3
7 5 3 0
"""


@pytest.fixture
def toy_text():
    return TOY_TEXT


@pytest.fixture
def toy():
    return parse_matrix(TOY_TEXT, "square")


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.txt"
    path.write_text(TOY_TEXT)
    return str(path)
