import numpy as np
import pytest

from selfsim.errors import ProfileFormatError
from selfsim.profile import Profile, dumps, loads, read_csv, write_csv


def sample():
    xi = np.array([-1.0, 0.0, 0.0, 1.0])
    states = np.arange(16, dtype=float).reshape(4, 4) / 7
    return Profile(xi, states)


def test_roundtrip_is_exact(tmp_path):
    prof = sample()
    back = loads(dumps(prof))
    np.testing.assert_array_equal(back.xi, prof.xi)
    np.testing.assert_array_equal(back.states, prof.states)
    path = tmp_path / "p.csv"
    write_csv(prof, path)
    assert read_csv(path, dim=4).dim == 4
    assert path.read_text().splitlines()[0] == "xi,u1,u2,u3,u4"


def test_jump_rows():
    assert sample().jump_rows.tolist() == [1]


@pytest.mark.parametrize("text", [
    "",
    "x,u1\n0,1\n1,2\n",
    "xi,u1\n0,1\n1\n",
    "xi,u1\n0,a\n1,2\n",
    "xi,u1\n1,1\n0,2\n",
    "xi,u1\n0,1\n0,2\n0,3\n",
    "xi,u1\n0,nan\n1,2\n",
    "xi,u1\n0,1\n",
])
def test_malformed(text):
    with pytest.raises(ProfileFormatError):
        loads(text)


def test_dimension_check():
    with pytest.raises(ProfileFormatError):
        loads(dumps(sample()), dim=3)


def test_decreasing_message_names_row():
    with pytest.raises(ProfileFormatError, match="row 3"):
        loads("xi,u1\n0,1\n1,1\n0.5,1\n")


def test_missing_file(tmp_path):
    with pytest.raises(ProfileFormatError):
        read_csv(tmp_path / "absent.csv")
