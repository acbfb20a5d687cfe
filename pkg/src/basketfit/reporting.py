"""Dataset files, run reports, and their (deterministic) serialization."""

import csv
import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from .data import CohortData, TrialDataset, validate


class DatasetError(ValueError):
    """Malformed or invalid dataset file."""


def parse_dataset(path) -> TrialDataset:
    """Read a cohort CSV with header ``cohort,n,r[,p_t]`` into a validated dataset.

    Row order is preserved. Errors carry the 1-based data-row number.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        header = [h.strip().lower() for h in header]
        if header not in (["cohort", "n", "r"], ["cohort", "n", "r", "p_t"]):
            raise DatasetError(
                f"{path}: header must be 'cohort,n,r' or 'cohort,n,r,p_t', "
                f"got {','.join(header)!r}"
            )
        has_pt = len(header) == 4
        cohorts = []
        for row_num, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: row {row_num}: expected {len(header)} fields, got {len(row)}"
                )
            name = row[0].strip()
            try:
                n = int(row[1])
                r = int(row[2])
            except ValueError:
                raise DatasetError(
                    f"{path}: row {row_num}: n and r must be integers, "
                    f"got n={row[1]!r}, r={row[2]!r}"
                ) from None
            p_t = None
            if has_pt and row[3].strip():
                try:
                    p_t = float(row[3])
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {row_num}: p_t must be a number, got {row[3]!r}"
                    ) from None
            cohorts.append(CohortData(name, n, r, p_t))
    if not cohorts:
        raise DatasetError(f"{path}: empty dataset (no data rows)")
    dataset = TrialDataset(tuple(cohorts))
    errors = validate(dataset)
    if errors:
        # map cohort indices back to data-row numbers for the message
        raise DatasetError(f"{path}: " + "; ".join(
            e.replace("cohort ", "row ", 1) for e in errors
        ))
    return dataset


def load_vemurafenib() -> TrialDataset:
    """The bundled six-cohort solid-tumor basket dataset."""
    ref = resources.files("basketfit").joinpath("datasets/vemurafenib.csv")
    with resources.as_file(ref) as path:
        return parse_dataset(path)


@dataclass(frozen=True)
class RunReport:
    """Everything a fit produced, in JSON-serializable form.

    ``estimates`` rows are dicts with keys cohort, cluster, raw_rate,
    post_mean, ci_low, ci_high. Partition fields are None for the
    single-model comparator methods. Serialization is deterministic
    (sorted keys, shortest-roundtrip floats), so identical inputs and seed
    yield byte-identical files.
    """

    method: str
    seed: int
    dataset: list
    p_t: list | None
    configs: dict
    partition: list | None
    k_point: int | None
    k_pmf: dict | None
    coclustering: list | None
    estimates: list

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["k_pmf"] is not None:
            d["k_pmf"] = {str(k): v for k, v in sorted(d["k_pmf"].items())}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        k_pmf = d["k_pmf"]
        if k_pmf is not None:
            k_pmf = {int(k): v for k, v in k_pmf.items()}
        return cls(
            method=d["method"],
            seed=d["seed"],
            dataset=d["dataset"],
            p_t=d["p_t"],
            configs=d["configs"],
            partition=d["partition"],
            k_point=d["k_point"],
            k_pmf=k_pmf,
            coclustering=d["coclustering"],
            estimates=d["estimates"],
        )

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


ESTIMATE_COLUMNS = ("cohort", "cluster", "raw_rate", "post_mean", "ci_low", "ci_high")


def estimates_csv(report: RunReport) -> str:
    """Plot-ready table of per-cohort means and interval bounds."""
    lines = [",".join(ESTIMATE_COLUMNS)]
    for row in report.estimates:
        cluster = "" if row["cluster"] is None else str(row["cluster"])
        lines.append(
            f"{row['cohort']},{cluster},{row['raw_rate']!r},"
            f"{row['post_mean']!r},{row['ci_low']!r},{row['ci_high']!r}"
        )
    return "\n".join(lines) + "\n"


def write_fit_outputs(report: RunReport, out_dir) -> dict:
    """Write report.json and estimates.csv under out_dir; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    csv_path = out / "estimates.csv"
    json_path.write_text(report.to_json(), encoding="utf-8")
    csv_path.write_text(estimates_csv(report), encoding="utf-8")
    return {"report": json_path, "estimates": csv_path}
