import itertools
import random

import pytest
from hypothesis import given, strategies as st

from rackkex.words import (IDENTITY, Letter, Symbol, Word, canonical_bytes, format_word,
                           from_canonical_bytes, inv, is_positive, mul, parse_word, reduce)

a, b, c, d = (Letter(i) for i in range(4))
A, B = a.inverse(), b.inverse()


def W(text):
    return parse_word(text)


letters = st.lists(st.integers(1, 3).flatmap(lambda i: st.sampled_from([i, -i])), max_size=20)


def random_codes(rng, n_symbols=3, max_len=12):
    return [rng.choice((1, -1)) * rng.randint(1, n_symbols) for _ in range(rng.randint(0, max_len))]


class TestReduce:
    def test_cancel_pair(self):
        assert reduce([a, A]) == IDENTITY

    def test_empty(self):
        assert reduce([]) == IDENTITY
        assert str(IDENTITY) == "1"

    def test_forced_cancellation(self):
        assert reduce([a, b, B, A, a]) == Word([a])

    @given(letters)
    def test_result_is_reduced_and_idempotent(self, codes):
        w = reduce(codes)
        assert all(x != -y for x, y in zip(w.codes, w.codes[1:]))
        assert reduce(w.codes) == w

    def test_order_independent(self):
        # cancelling the inner pair first or the outer pair first gives the same word
        assert reduce([a, b, B, A]) == reduce([a, A]) == IDENTITY

    def test_ten_thousand_random_sequences(self):
        rng = random.Random(0)
        for _ in range(10_000):
            w = reduce(random_codes(rng))
            assert reduce(w.codes) == w
            assert mul(w, inv(w)) == IDENTITY


class TestMulInv:
    def test_examples(self):
        assert mul(W("a0*a1"), W("a1^-1")) == W("a0")
        assert mul(IDENTITY, W("a0*a1")) == W("a0*a1")
        assert mul(W("a0*a1"), W("a2*a3")) == W("a0*a1*a2*a3")

    def test_inverse_examples(self):
        assert inv(W("a0*a1")) == W("a1^-1*a0^-1")
        assert inv(IDENTITY) == IDENTITY
        assert inv(W("a0*a1^-1")) == W("a1*a0^-1")

    @given(letters, letters, letters)
    def test_group_laws(self, x, y, z):
        u, v, w = Word(x), Word(y), Word(z)
        assert mul(mul(u, v), w) == mul(u, mul(v, w))
        assert mul(u, IDENTITY) == u == mul(IDENTITY, u)
        assert mul(u, inv(u)) == IDENTITY
        assert inv(inv(u)) == u

    def test_mul_matches_reduce_of_concatenation(self):
        rng = random.Random(3)
        for _ in range(500):
            u, v = Word(random_codes(rng)), Word(random_codes(rng))
            assert mul(u, v) == reduce(u.codes + v.codes)


class TestPositivity:
    def test_generator_and_inverse(self):
        assert is_positive(W("a0"))
        assert not is_positive(W("a0^-1"))

    def test_first_letter_decides(self):
        assert is_positive(W("a0*a1^-1"))
        assert not is_positive(W("a1*a0^-1"))

    def test_empty_word_rejected(self):
        with pytest.raises(ValueError):
            is_positive(IDENTITY)

    def test_exactly_one_of_w_and_inverse(self):
        rng = random.Random(11)
        checked = 0
        while checked < 10_000:
            w = Word(random_codes(rng, 4, 10))
            if not w:
                continue
            assert is_positive(w) != is_positive(inv(w))
            checked += 1


class TestEncoding:
    def test_examples(self):
        assert canonical_bytes(IDENTITY) == bytes.fromhex("00000000")
        assert canonical_bytes(W("a0")) == bytes.fromhex("00000001" "00000001")
        assert canonical_bytes(W("a0^-1")) == bytes.fromhex("00000001" "ffffffff")

    def test_injective_exhaustive(self):
        seen = {}
        alphabet = [1, -1, 2, -2, 3, -3]
        for n in range(5):
            for codes in itertools.product(alphabet, repeat=n):
                w = Word(codes)
                if w.codes != codes:
                    continue
                enc = canonical_bytes(w)
                assert enc not in seen, (w, seen.get(enc))
                seen[enc] = w
                assert from_canonical_bytes(enc) == w
        # reduced words of length <= 4 over 3 symbols: 1 + 6 + 30 + 150 + 750
        assert len(seen) == 937

    def test_decode_rejects_unreduced(self):
        raw = bytes.fromhex("00000002" "00000001" "ffffffff")
        with pytest.raises(ValueError):
            from_canonical_bytes(raw)

    def test_decode_rejects_truncated(self):
        with pytest.raises(ValueError):
            from_canonical_bytes(bytes.fromhex("00000002" "00000001"))


class TestText:
    def test_round_trip(self):
        assert format_word(W("a0*a2^-1*a1")) == "a0*a2^-1*a1"
        assert parse_word("1") == IDENTITY

    def test_named_alphabet(self):
        w = parse_word("a*b^-1", ["a", "b"])
        assert w.codes == (1, -2)
        assert format_word(w, ["a", "b"]) == "a*b^-1"

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            parse_word("c", ["a", "b"])

    def test_symbol_defaults(self):
        assert Symbol(3).display_name == "a3"
        with pytest.raises(ValueError):
            Letter(0, 2)
