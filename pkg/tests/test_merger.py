from larmor.merger import Merger


def test_merge_two_dicts():
    """Test basic dict merging with override"""
    base = {"B_T": 2.0, "theta_rad": 0.0}
    override = {"theta_rad": 0.5, "v_mps": 10.0}

    result = Merger.merge(base, override)

    assert result == {"B_T": 2.0, "theta_rad": 0.5, "v_mps": 10.0}


def test_merge_three_layers():
    """Test three-level merge (config file → flags → sweep point)"""
    config = {"B_T": 0.5, "format": "json"}
    flags = {"B_T": 2.0, "v_mps": 10.0}
    point = {"v_mps": 200.0}

    result = Merger.merge(config, flags, point)

    assert result == {
        "B_T": 2.0,  # Flags override config
        "format": "json",
        "v_mps": 200.0,
    }


def test_none_values_do_not_override():
    """Unset flags keep the config file value"""
    result = Merger.merge({"B_T": 0.5}, {"B_T": None, "width_m": None})
    assert result == {"B_T": 0.5}


def test_none_layers_are_skipped():
    """A missing layer is treated as empty"""
    assert Merger.merge(None, {"B_T": 1.0}, None) == {"B_T": 1.0}


def test_merge_empty_dicts():
    """Test merging with empty dicts"""
    assert Merger.merge({}, {"B_T": 1.0}, {}) == {"B_T": 1.0}


def test_merge_returns_copy():
    """Test merging single dict returns copy"""
    original = {"B_T": 1.0}
    result = Merger.merge(original)

    assert result == original
    assert result is not original


def test_falsy_values_override():
    """Zero and False are real values"""
    result = Merger.merge({"B_T": 2.0, "normalized": True}, {"B_T": 0.0, "normalized": False})
    assert result == {"B_T": 0.0, "normalized": False}
