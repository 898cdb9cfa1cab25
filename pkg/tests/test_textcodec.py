import numpy as np
import pytest

from dcsa.textcodec import SENTINEL, Text, char_at, encode_bytes


def test_encode_banana_style():
    t = encode_bytes(b"banana")
    assert t.chars.tolist() == [1, 0, 2, 0, 2, 0]


def test_encode_known_word():
    t = encode_bytes(b"acbaacedbbea")
    assert t.chars.tolist() == [0, 2, 1, 0, 0, 2, 4, 3, 1, 1, 4, 0]


def test_encode_empty_and_single():
    assert len(encode_bytes(b"")) == 0
    assert encode_bytes(b"z").chars.tolist() == [0]


def test_encode_preserves_suffix_order():
    # rank encoding is strictly monotone, so suffix comparisons agree
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        raw = bytes(rng.integers(0, 256, size=n, dtype=np.uint8))
        t = encode_bytes(raw)
        enc = bytes(t.chars.astype(np.uint8))  # alphabet < 256 always
        suf_raw = sorted(range(n), key=lambda i: raw[i:])
        suf_enc = sorted(range(n), key=lambda i: enc[i:])
        assert suf_raw == suf_enc


def test_alphabet_bound():
    t = encode_bytes(bytes(range(256)) * 2)
    assert t.chars.max() == 255
    assert t.chars.min() == 0
    assert len(t) == 512


def test_text_validation():
    Text(np.array([0, 1, 2], dtype=np.int64))
    with pytest.raises(ValueError):
        Text(np.array([0, 3], dtype=np.int64))  # 3 >= n=2
    with pytest.raises(ValueError):
        Text(np.array([-1, 0], dtype=np.int64))
    with pytest.raises(ValueError):
        Text(np.zeros((2, 2), dtype=np.int64))


def test_char_at_sentinel():
    t = encode_bytes(b"ab")
    assert char_at(t, 0) == 0
    assert char_at(t, 1) == 1
    assert char_at(t, 2) == SENTINEL
    assert char_at(t, 10 ** 9) == SENTINEL
    with pytest.raises(ValueError):
        char_at(t, -1)
