import numpy as np
import pytest

from miso.depend import CellHealth, update_health


def feed(h, pattern):
    for step, m in enumerate(pattern, start=1):
        update_health(h, step, m)
    return h


def test_nine_in_a_hundred_is_not_flagged():
    h = feed(CellHealth(1, 100, 0.1), [True] * 9 + [False] * 91)
    assert not h.flagged[0] and h.total[0] == 9


def test_ten_in_first_hundred_is_flagged():
    h = feed(CellHealth(1, 100, 0.1), [False] * 90 + [True] * 10)
    assert h.flagged[0]


def test_no_mismatches_never_flagged():
    h = feed(CellHealth(3, 10, 0.1), [False] * 50)
    assert not h.flagged.any()


def test_window_slides():
    # 9 early mismatches leave the window before the next 9 arrive
    h = feed(CellHealth(1, 100, 0.1), [True] * 9 + [False] * 100 + [True] * 9)
    assert h.in_window[0] == 9 and h.total[0] == 18 and not h.flagged[0]


def test_flag_is_sticky():
    h = feed(CellHealth(1, 10, 0.2), [True, True] + [False] * 50)
    assert h.flagged[0] and h.in_window[0] == 0


def test_per_instance_vectors():
    h = CellHealth(4, 10, 0.3)
    for s in range(10):
        h.update(s, np.array([s < 3, s < 2, False, True]))
    assert h.flagged.tolist() == [True, False, False, True]


@pytest.mark.parametrize("window, threshold", [(0, 0.1), (10, 0.0), (10, 1.5)])
def test_bad_parameters(window, threshold):
    with pytest.raises(ValueError):
        CellHealth(1, window, threshold)
