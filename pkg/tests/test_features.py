import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from emprobe.corpus import MethodRecord, tokenize
from emprobe.features import (
    FeatureSchema,
    build_vocab,
    count_matrix,
    default_schema,
    encode,
    encode_matrix,
    encode_sequence,
    extract_counts,
    fit_scaler,
)
from emprobe.features.encoding import (
    HC_BINARY,
    HC_BINARY_CX_NORM,
    HC_NORM,
    HC_NORM_CX_NORM,
    scheme_width,
)
from emprobe.features.io import read_feature_csv, write_feature_csv, write_sequences
from emprobe.features.schema import N_COMPLEXITY, N_METHOD
from emprobe.features.sequences import CHAR, TOKEN, SequenceVocab, masked_text, symbols


def rec(code, name="f", rid="a", split="train"):
    return MethodRecord(id=rid, declared_name=name, source=code, split=split)


def raw(text):
    """A record whose tokens are already set, so char mode skips name masking."""
    return rec(text).with_tokens(tokenize(text))


def nonzero(code, name="f"):
    names = default_schema().names
    return {n: int(v) for n, v in zip(names, extract_counts(rec(code, name))) if v}


class TestSchema:
    def test_layout(self):
        s = default_schema()
        assert len(s.names) == N_METHOD + N_COMPLEXITY == 47
        assert len(set(s.names)) == len(s.names)

    def test_json_roundtrip(self):
        s = default_schema()
        again = FeatureSchema.from_json(s.to_json())
        assert again.names == s.names
        assert json.loads(again.to_json()) == json.loads(s.to_json())


class TestExtractCounts:
    def test_equals_hand_count(self):
        got = nonzero("boolean equals(Object o){ return this == o; }", "equals")
        for key, want in {"This": 1, "Boolean": 1, "Return": 1, "Parameter": 1,
                          "Condition": 1, "LOC": 1}.items():
            assert got[key] == want
        assert "Instance" not in got

    def test_empty_body(self):
        got = nonzero("void f(){}")
        names = default_schema().names[:N_METHOD]
        assert not any(n in got for n in names)
        assert got.get("Parameter", 0) == 0
        assert got["LOC"] == 1 and got["Block"] == 1

    def test_ternary(self):
        got = nonzero("int f(int x, int y, int z){ return x > 0 && y < 2 ? y : z; }")
        assert got["TernaryOperator"] == 1
        assert got["Decision"] >= 1
        assert got["Condition"] == 3  # >, &&, <

    def test_instanceof_and_new_are_separate(self):
        got = nonzero("boolean equals(Object o){ if (o instanceof Foo) { return new Foo().x; } return false; }",
                      "equals")
        assert got["Instance"] == 1 and got["New"] == 1

    def test_self_call_does_not_count_as_feature(self):
        # the masked own name must not trigger the "equals" call feature
        got = nonzero("boolean equals(Object o){ return equals(o) && other.equals(o); }", "equals")
        assert got["equals"] == 1

    def test_loops_and_jumps(self):
        code = """void f(int n) {
            for (int i = 0; i < n; i++) { if (i == 3) break; }
            while (n > 0) { n--; continue; }
        }"""
        got = nonzero(code)
        assert got["Loop"] == 2
        assert got["Jump"] == 2

    def test_deterministic_and_unrelated_order(self):
        a = "int f(int p){ int x = 1; int y = 2; return p; }"
        b = "int f(int p){ int y = 2; int x = 1; return p; }"
        assert np.array_equal(extract_counts(rec(a)), extract_counts(rec(a)))
        assert np.array_equal(extract_counts(rec(a)), extract_counts(rec(b)))

    def test_count_matrix_shape(self):
        m = count_matrix([rec("void f(){}", rid="a"), rec("void f(){ g(); }", rid="b")])
        assert m.shape == (2, 47)


class TestScaler:
    def test_hand_values(self):
        s = fit_scaler(np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]))
        assert np.allclose(s.mean, [2.0, 5.0])
        assert s.std[0] == pytest.approx(np.sqrt(2 / 3))
        assert s.std[1] == 0.0

    def test_single_row(self):
        s = fit_scaler(np.array([[4.0, 1.0, 0.0]]))
        assert np.all(s.std == 0)

    def test_zero_rows_rejected(self):
        with pytest.raises(ValueError, match="zero rows"):
            fit_scaler(np.empty((0, 3)))

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.int64, st.tuples(st.integers(2, 40), st.integers(1, 6)),
                  elements=st.integers(0, 50)))
    def test_train_columns_standardized(self, x):
        s = fit_scaler(x)
        z = s.transform(x, range(x.shape[1]))
        varying = s.std > 0
        assert np.all(np.abs(z.mean(axis=0)) <= 1e-9)
        assert np.all(np.abs(z[:, varying].std(axis=0) - 1) <= 1e-9)
        assert np.all(z[:, ~varying] == 0)


class TestEncode:
    def counts(self):
        rng = np.random.default_rng(0)
        return rng.integers(0, 4, size=(10, 47))

    def test_binary_threshold(self):
        row = np.zeros(47, dtype=int)
        row[0], row[1] = 5, 0
        v = encode(row, HC_BINARY)
        assert v[0] == 1 and v[1] == 0
        assert v.shape == (N_METHOD,)

    def test_standardized_value(self):
        c = np.zeros((3, 47))
        c[:, 0] = [1, 2, 3]
        scaler = fit_scaler(c)
        row = np.zeros(47)
        row[0] = 3
        assert encode(row, HC_NORM, scaler)[0] == pytest.approx(1.2247, abs=1e-4)
        assert encode(row, HC_NORM, scaler)[1] == 0  # zero-std column

    @pytest.mark.parametrize("scheme", [HC_BINARY, HC_NORM, HC_BINARY_CX_NORM, HC_NORM_CX_NORM])
    def test_widths(self, scheme):
        c = self.counts()
        out = encode_matrix(c, scheme, fit_scaler(c))
        assert out.shape == (10, scheme_width(scheme))

    def test_binary_cx_norm_concatenates(self):
        c = self.counts()
        s = fit_scaler(c)
        out = encode_matrix(c, HC_BINARY_CX_NORM, s)
        assert np.array_equal(out[:, :N_METHOD], encode_matrix(c, HC_BINARY))
        assert np.allclose(out[:, N_METHOD:], encode_matrix(c, HC_NORM_CX_NORM, s)[:, N_METHOD:])

    def test_missing_scaler(self):
        with pytest.raises(ValueError, match="scaler"):
            encode_matrix(self.counts(), HC_NORM)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError, match="unknown scheme"):
            encode_matrix(self.counts(), "HC_Bogus")

    def test_scaler_from_train_only(self):
        train = np.zeros((4, 47))
        train[:, 0] = [0, 1, 0, 1]
        test = np.zeros((1, 47))
        test[0, 0] = 3
        out = encode_matrix(test, HC_NORM, fit_scaler(train))
        assert out[0, 0] == pytest.approx((3 - 0.5) / 0.5)


class TestSequences:
    def test_char_vocab_order(self):
        v = build_vocab([raw("ab")], CHAR)
        assert v.map == {"a": 1, "b": 2}

    def test_encode_with_oov(self):
        v = SequenceVocab(CHAR, {"a": 1, "b": 2})
        assert encode_sequence(raw("ab"), v) == [1, 2]
        assert encode_sequence(raw("abc"), v) == [1, 2, 0]

    def test_non_ascii_dropped(self):
        assert symbols(raw('x = "été";'), CHAR) == list('x = "t";')

    def test_char_mode_masks_name_and_comments(self):
        r = rec("int size() { // note\n return size(); }", name="size")
        text = masked_text(r)
        assert "size" not in text and "note" not in text
        assert text.count("METHOD_NAME") == 2

    def test_token_mode(self):
        v = build_vocab([rec("int f() { return 1; }")], TOKEN)
        assert list(v.map)[:3] == ["int", "METHOD_NAME", "("]
        assert encode_sequence(rec("int f() { return 2; }"), v)[-3] == 0  # unseen literal

    def test_vocab_json_roundtrip(self):
        v = build_vocab([rec("int f() { return 1; }")], TOKEN)
        again = SequenceVocab.from_json(v.to_json())
        assert again == v and again.inverse()[1] == "int"

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            symbols(rec("x"), "word")


class TestFeatureIO:
    def test_csv_roundtrip_floats(self, tmp_path):
        m = np.array([[0.1, -1 / 3], [1e-17, 2.5]])
        p = tmp_path / "f.csv"
        write_feature_csv(p, ["a", "b"], [1, -1], ["x", "y"], m)
        ids, labels, names, back = read_feature_csv(p)
        assert ids == ["a", "b"] and names == ["x", "y"]
        assert labels.tolist() == [1, -1]
        assert np.array_equal(back, m)

    def test_integers_written_plain(self, tmp_path):
        p = tmp_path / "c.csv"
        write_feature_csv(p, ["a"], [1], ["x", "y"], np.array([[3, 0]]))
        assert p.read_text().splitlines()[1] == "a,1,3,0"

    def test_shape_checked(self, tmp_path):
        with pytest.raises(ValueError, match="does not match"):
            write_feature_csv(tmp_path / "x.csv", ["a"], [1], ["x"], np.zeros((1, 2)))

    def test_sequences_jsonl(self, tmp_path):
        p = tmp_path / "s.jsonl"
        write_sequences(p, [("a", 1, [1, 2]), ("b", -1, [])])
        rows = [json.loads(x) for x in p.read_text().splitlines()]
        assert rows == [{"id": "a", "label": 1, "indices": [1, 2]},
                        {"id": "b", "label": -1, "indices": []}]
