#!/usr/bin/env python3
"""Convert the raw Adult, COMPAS and German credit files into the headered
CSV files under data/.

The raw files are taken from the `responsibly` wheel, which bundles the UCI
and ProPublica originals:

    pip download --no-deps responsibly==0.1.2 -d /tmp/pkgs
    python3 scripts/prepare_data.py /tmp/pkgs/responsibly-0.1.2-py3-none-any.whl

Only format conversion and documented row filters happen here; every
encoding decision lives in data/schemas/*.json and is applied by the loader.
"""
import csv
import io
import sys
import zipfile
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data"

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num", "marital_status",
    "occupation", "relationship", "race", "gender", "capital_gain", "capital_loss",
    "hours_per_week", "native_country", "income",
]

GERMAN_COLUMNS = [
    "status", "duration", "credit_history", "purpose", "credit_amount", "savings",
    "employment", "installment_rate", "personal_status", "other_debtors",
    "residence_since", "property", "age", "installment_plans", "housing",
    "existing_credits", "job", "people_liable", "telephone", "foreign_worker",
    "credit",
]

COMPAS_COLUMNS = [
    "sex", "age", "age_cat", "race", "juv_fel_count", "juv_misd_count",
    "juv_other_count", "priors_count", "c_charge_degree",
    "days_b_screening_arrest", "two_year_recid",
]


def write(name, header, rows):
    with open(OUT / name, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"{name}: {len(rows)} rows")


def adult(text):
    rows = []
    for line in text.splitlines():
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != len(ADULT_COLUMNS):
            continue
        fields[-1] = fields[-1].rstrip(".")
        rows.append(fields)
    return rows


def german(text):
    rows = []
    for line in text.splitlines():
        fields = line.split()
        if len(fields) != len(GERMAN_COLUMNS):
            continue
        # A92 and A95 are the female personal-status codes.
        sex = "female" if fields[8] in ("A92", "A95") else "male"
        fields[-1] = "good" if fields[-1] == "1" else "bad"
        rows.append(fields[:-1] + [sex, fields[-1]])
    return rows


def compas(text):
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for r in reader:
        # ProPublica two-year recidivism filter.
        days = r["days_b_screening_arrest"]
        if days == "" or not -30 <= float(days) <= 30:
            continue
        if r["is_recid"] == "-1" or r["c_charge_degree"] == "O" or r["score_text"] == "N/A":
            continue
        race = "African-American" if r["race"] == "African-American" else "Other"
        out = [r[c] for c in COMPAS_COLUMNS]
        out[COMPAS_COLUMNS.index("race")] = race
        out[COMPAS_COLUMNS.index("days_b_screening_arrest")] = str(int(float(days)))
        rows.append(out)
    return rows


def main(wheel):
    z = zipfile.ZipFile(wheel)
    read = lambda p: z.read("responsibly/dataset/" + p).decode("utf-8")
    write("adult_train.csv", ADULT_COLUMNS, adult(read("adult/adult.data")))
    write("adult_test.csv", ADULT_COLUMNS, adult(read("adult/adult.test")))
    write("german.csv", GERMAN_COLUMNS[:-1] + ["sex", "credit"], german(read("german/german.data")))
    write("compas.csv", COMPAS_COLUMNS, compas(read("compas/compas-scores-two-years.csv")))


if __name__ == "__main__":
    main(sys.argv[1])
