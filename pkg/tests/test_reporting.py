"""Record serialization round-trips."""

import math

import pytest

from ramdiv import (CSV_HEADER, EstimateRecord, UsageError, records_from_csv,
                    records_from_json, records_to_csv, records_to_json)


def sample_records():
    return [
        EstimateRecord("kl", 1, -1.5, 1, 128, "mixture", 0, 12345,
                       0.59657358979, 0.5),
        EstimateRecord("js", 4, 0.0, 500, 128, "prior", 3, 678,
                       1.0 / 3.0, None),
        EstimateRecord("chisq", 16, 2.0, 8, 8192, "prior", 1, 99,
                       math.inf, math.inf),
        EstimateRecord("fbeta:0.75", 1, 0.5, 2, 64, "mixture", 9, 4,
                       -1.25e-17, 3.0000000000000004),
    ]


class TestCsv:
    def test_header_is_exact(self):
        assert CSV_HEADER == "divergence,d,lambda,N,M,proposal,trial,seed,estimate,truth"
        text = records_to_csv(sample_records())
        assert text.splitlines()[0] == CSV_HEADER

    def test_round_trip_is_exact(self):
        records = sample_records()
        assert records_from_csv(records_to_csv(records)) == records

    def test_seventeen_digit_reals(self):
        text = records_to_csv(sample_records())
        assert "0.33333333333333331" in text
        assert "3.0000000000000004" in text

    def test_missing_truth_is_empty_field(self):
        line = records_to_csv(sample_records()).splitlines()[2]
        assert line.endswith(",")

    def test_infinities_survive(self):
        back = records_from_csv(records_to_csv(sample_records()))
        assert back[2].estimate == math.inf
        assert back[2].truth == math.inf

    def test_wrong_header_rejected(self):
        with pytest.raises(UsageError):
            records_from_csv("a,b,c\n1,2,3\n")

    def test_short_row_rejected(self):
        text = CSV_HEADER + "\nkl,1,0.5,1,32\n"
        with pytest.raises(UsageError):
            records_from_csv(text)

    def test_empty_body_is_fine(self):
        assert records_from_csv(CSV_HEADER + "\n") == []


class TestJson:
    def test_round_trip_is_exact(self):
        records = sample_records()
        assert records_from_json(records_to_json(records)) == records

    def test_lambda_key_name(self):
        text = records_to_json(sample_records())
        assert '"lambda"' in text
        assert '"lam"' not in text

    def test_null_truth(self):
        back = records_from_json(records_to_json(sample_records()))
        assert back[1].truth is None

    def test_non_array_rejected(self):
        with pytest.raises(UsageError):
            records_from_json('{"divergence": "kl"}')

    def test_missing_key_rejected(self):
        with pytest.raises(UsageError):
            records_from_json('[{"divergence": "kl"}]')

    def test_cross_format_agreement(self):
        records = sample_records()
        via_csv = records_from_csv(records_to_csv(records))
        via_json = records_from_json(records_to_json(records))
        assert via_csv == via_json
