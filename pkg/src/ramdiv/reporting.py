"""Serialization of sweep records to CSV and JSON.

Both formats round-trip exactly: reals go out with 17 significant digits
(CSV) or shortest-repr (JSON), so ``records_from_*(records_to_*(rs)) == rs``
bit for bit, including infinities.  A missing truth (no closed form) is an
empty CSV field / JSON null.
"""

from __future__ import annotations

import csv
import io
import json

from .errors import UsageError
from .experiments import EstimateRecord

__all__ = [
    "CSV_HEADER",
    "records_to_csv",
    "records_from_csv",
    "records_to_json",
    "records_from_json",
]

CSV_HEADER = "divergence,d,lambda,N,M,proposal,trial,seed,estimate,truth"

_FIELDS = CSV_HEADER.split(",")


def _real(x: float) -> str:
    return format(float(x), ".17g")


def records_to_csv(records) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in records:
        truth = "" if r.truth is None else _real(r.truth)
        out.write(f"{r.divergence},{r.d},{_real(r.lam)},{r.N},{r.M},"
                  f"{r.proposal},{r.trial},{r.seed},{_real(r.estimate)},{truth}\n")
    return out.getvalue()


def records_from_csv(text: str) -> list[EstimateRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [row for row in rows if row]
    if not rows or rows[0] != _FIELDS:
        raise UsageError(f"expected header {CSV_HEADER!r}")
    records = []
    for row in rows[1:]:
        if len(row) != len(_FIELDS):
            raise UsageError(f"row has {len(row)} fields, expected {len(_FIELDS)}: {row!r}")
        records.append(EstimateRecord(
            divergence=row[0], d=int(row[1]), lam=float(row[2]), N=int(row[3]),
            M=int(row[4]), proposal=row[5], trial=int(row[6]), seed=int(row[7]),
            estimate=float(row[8]), truth=None if row[9] == "" else float(row[9])))
    return records


def records_to_json(records) -> str:
    rows = []
    for r in records:
        rows.append({"divergence": r.divergence, "d": r.d, "lambda": r.lam,
                     "N": r.N, "M": r.M, "proposal": r.proposal, "trial": r.trial,
                     "seed": r.seed, "estimate": r.estimate, "truth": r.truth})
    return json.dumps(rows, indent=2) + "\n"


def records_from_json(text: str) -> list[EstimateRecord]:
    rows = json.loads(text)
    if not isinstance(rows, list):
        raise UsageError("expected a JSON array of records")
    records = []
    for row in rows:
        missing = [k for k in ("divergence", "lambda") if k not in row]
        if missing:
            raise UsageError(f"record missing keys {missing}: {row!r}")
        truth = row.get("truth")
        records.append(EstimateRecord(
            divergence=str(row["divergence"]), d=int(row["d"]), lam=float(row["lambda"]),
            N=int(row["N"]), M=int(row["M"]), proposal=str(row["proposal"]),
            trial=int(row["trial"]), seed=int(row["seed"]),
            estimate=float(row["estimate"]), truth=None if truth is None else float(truth)))
    return records
