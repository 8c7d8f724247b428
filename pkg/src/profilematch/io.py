"""CSV and JSON interchange.

Every numeric value is written with 17 significant digits, enough to
round-trip any float64 exactly, so reruns and points-vs-distances
round-trips can be compared byte for byte.
"""

import csv
import math

import numpy as np

from .errors import InputFormatError
from .geometry import DistanceMatrix, PointCloud
from .matching import MatchResult
from .models import LabeledSample
from .transport import Coupling

__all__ = [
    "fmt",
    "read_point_cloud_csv",
    "read_distance_matrix_csv",
    "write_point_cloud_csv",
    "write_distance_matrix_csv",
    "write_match_csv",
    "write_permutation_csv",
    "write_coupling_csv",
    "write_labeled_sample_csv",
    "write_experiment_csv",
    "write_json",
    "summarize_records",
]


def fmt(x: float) -> str:
    """Full round-trip decimal form of a float."""
    return format(float(x), ".17g")


def _read_rows(path: str) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputFormatError(f"{path} is empty")
    return rows


def _is_numeric_row(row: list[str]) -> bool:
    for cell in row:
        try:
            float(cell)
        except ValueError:
            return False
    return True


def _parse_matrix(rows: list[list[str]], path: str) -> np.ndarray:
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InputFormatError(f"{path}: row {i + 1} has {len(row)} cells, expected {width}")
        try:
            out[i] = [float(c) for c in row]
        except ValueError as exc:
            raise InputFormatError(f"{path}: non-numeric cell in row {i + 1}") from exc
    return out


def read_point_cloud_csv(path: str) -> PointCloud:
    """Read one point per row; a non-numeric first row is taken as a header."""
    rows = _read_rows(path)
    if not _is_numeric_row(rows[0]):
        rows = rows[1:]
        if not rows:
            raise InputFormatError(f"{path} contains only a header")
    return PointCloud(_parse_matrix(rows, path))


def read_distance_matrix_csv(path: str) -> DistanceMatrix:
    """Read an n x n distance matrix, all cells numeric."""
    return DistanceMatrix(_parse_matrix(_read_rows(path), path))


def write_point_cloud_csv(path: str, cloud: PointCloud) -> None:
    with open(path, "w", newline="") as fh:
        for row in cloud.points:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_distance_matrix_csv(path: str, dmat: DistanceMatrix) -> None:
    with open(path, "w", newline="") as fh:
        for row in dmat.entries:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_match_csv(path: str, result: MatchResult) -> None:
    inlier = np.zeros(result.n, dtype=np.int64)
    inlier[result.inliers] = 1
    with open(path, "w", newline="") as fh:
        fh.write("source_index,target_index,discrepancy,inlier\n")
        for i in range(result.n):
            fh.write(f"{i},{result.pi[i]},{fmt(result.discrepancy[i])},{inlier[i]}\n")


def write_permutation_csv(path: str, mapping: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("source_index,target_index\n")
        for i, j in enumerate(mapping):
            fh.write(f"{i},{j}\n")


def write_coupling_csv(path: str, coupling: Coupling) -> None:
    with open(path, "w", newline="") as fh:
        for row in coupling.gamma:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_labeled_sample_csv(path: str, sample: LabeledSample) -> None:
    d = sample.cloud.d
    with open(path, "w", newline="") as fh:
        fh.write(",".join(f"x{k}" for k in range(d)) + ",label\n")
        for row, lab in zip(sample.cloud.points, sample.labels):
            fh.write(",".join(fmt(v) for v in row) + f",{lab}\n")


def write_experiment_csv(path: str, records) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("method,sigma,replicate,perfect,accuracy\n")
        for rec in records:
            fh.write(
                f"{rec.method},{fmt(rec.sigma)},{rec.replicate},"
                f"{1 if rec.perfect else 0},{fmt(rec.accuracy)}\n"
            )


def _json_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if not math.isfinite(f):
            raise InputFormatError("cannot serialise non-finite number to JSON")
        return fmt(f)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, dict):
        inner = ",".join(f"{_json_value(str(k))}:{_json_value(x)}" for k, x in v.items())
        return "{" + inner + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_json_value(x) for x in v) + "]"
    raise InputFormatError(f"cannot serialise {type(v).__name__} to JSON")


def write_json(path: str, payload: dict) -> None:
    """Minimal JSON writer so floats keep the 17-digit format."""
    with open(path, "w", newline="") as fh:
        fh.write(_json_value(payload) + "\n")


def summarize_records(records) -> dict:
    """Per-(method, sigma) accuracy moments and exact-recovery frequency."""
    groups: dict[tuple[str, float], list] = {}
    for rec in records:
        groups.setdefault((rec.method, rec.sigma), []).append(rec)
    out = []
    for method, sigma in sorted(groups):
        accs = np.array([r.accuracy for r in groups[(method, sigma)]])
        hits = np.array([1.0 if r.perfect else 0.0 for r in groups[(method, sigma)]])
        out.append(
            {
                "method": method,
                "sigma": sigma,
                "replicates": int(accs.size),
                "accuracy_mean": float(np.mean(accs)),
                "accuracy_std": float(np.std(accs)),
                "recovery_frequency": float(np.mean(hits)),
            }
        )
    return {"groups": out}
