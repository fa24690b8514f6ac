"""Comparison-table construction and rendering for mined datasets and reports."""

from __future__ import annotations

import io

from .dataset import TARGETS, DatasetRecord
from .errors import EmptyDataset
from .satd import CLASS_ORDER
from .stats import cliffs_delta, descriptive, mann_whitney, scott_knott_esd

MEASURES = ("mean", "median", "trimmed_mean")

NON_SATD = "Non-SATD"


def _group_values(records: list[DatasetRecord], metric: str) -> dict[str, list[float]]:
    groups: dict[str, list[float]] = {}
    for record in records:
        if record.label.is_satd:
            groups.setdefault(record.label.debt_type, []).append(float(record.target(metric)))
        else:
            groups.setdefault(NON_SATD, []).append(float(record.target(metric)))
    return groups


def _summaries(values: dict[str, list[float]]) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    for group, vals in values.items():
        summary = descriptive(vals)
        out[group] = {
            "mean": summary.mean,
            "median": summary.median,
            "trimmed_mean": summary.trimmed_mean,
            "n": summary.n,
        }
    return out


def build_stats(records: list[DatasetRecord]) -> dict:
    """Group summaries, tests, and ranks for every metric."""
    if not records:
        raise EmptyDataset("stats need at least one record")
    satd_values = {m: [] for m in TARGETS}
    non_satd_values = {m: [] for m in TARGETS}
    for record in records:
        bucket = satd_values if record.label.is_satd else non_satd_values
        for metric in TARGETS:
            bucket[metric].append(float(record.target(metric)))

    satd_vs_non: dict[str, dict] = {"summary": {}, "tests": {}}
    for metric in TARGETS:
        a, b = satd_values[metric], non_satd_values[metric]
        groups = {}
        if a:
            groups["SATD"] = _summaries({"SATD": a})["SATD"]
        if b:
            groups[NON_SATD] = _summaries({NON_SATD: b})[NON_SATD]
        satd_vs_non["summary"][metric] = groups
        if a and b:
            p = mann_whitney(a, b)["p_two_sided"] if len(a) >= 2 and len(b) >= 2 else None
            delta = cliffs_delta(a, b)
        else:
            p, delta = None, None
        satd_vs_non["tests"][metric] = {"p_two_sided": p, "cliffs_delta": delta}

    by_type: dict[str, dict] = {"summary": {}, "ranks": {}}
    type_order = list(CLASS_ORDER[1:]) + [NON_SATD]
    for metric in TARGETS:
        values = _group_values(records, metric)
        present = {g: values[g] for g in type_order if g in values}
        by_type["summary"][metric] = _summaries(present)
        by_type["ranks"][metric] = scott_knott_esd(present) if present else {}

    return {
        "n": len(records),
        "n_satd": sum(1 for r in records if r.label.is_satd),
        "metrics": list(TARGETS),
        "satd_vs_nonsatd": satd_vs_non,
        "by_type": by_type,
    }


# --- rendering ---------------------------------------------------------------


def _format_cell(value, rank=None) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        text = f"{value:.2f}" if abs(value) >= 0.005 or value == 0 else f"{value:.2e}"
    else:
        text = str(value)
    if rank is not None:
        text += f"({rank})"
    return text


def _render_grid(rows: list[list[str]], out: io.StringIO) -> None:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for row in rows:
        line = "  ".join(cell.ljust(w) for cell, w in zip(row, widths))
        out.write(line.rstrip() + "\n")


def render_stats_text(stats: dict) -> str:
    out = io.StringIO()
    metrics = stats["metrics"]
    out.write(f"records: {stats['n']}  satd: {stats['n_satd']}\n\n")

    out.write("== SATD vs non-SATD ==\n")
    rows = [["group", "measure", *metrics]]
    for measure in MEASURES:
        for group in ("SATD", NON_SATD):
            cells = []
            for metric in metrics:
                summary = stats["satd_vs_nonsatd"]["summary"][metric].get(group)
                cells.append(_format_cell(summary[measure]) if summary else "-")
            rows.append([group, measure, *cells])
    _render_grid(rows, out)
    rows = [["test", *metrics]]
    rows.append(
        ["p-value"]
        + [
            _format_cell(stats["satd_vs_nonsatd"]["tests"][m]["p_two_sided"])
            for m in metrics
        ]
    )
    rows.append(
        ["effect size"]
        + [
            _format_cell(stats["satd_vs_nonsatd"]["tests"][m]["cliffs_delta"])
            for m in metrics
        ]
    )
    out.write("\n")
    _render_grid(rows, out)

    out.write("\n== by debt type (rank in parentheses) ==\n")
    groups = []
    for metric in metrics:
        for g in stats["by_type"]["summary"][metric]:
            if g not in groups:
                groups.append(g)
    for measure in MEASURES:
        out.write(f"\n-- {measure} --\n")
        rows = [["type", *metrics]]
        for group in groups:
            cells = []
            for metric in metrics:
                summary = stats["by_type"]["summary"][metric].get(group)
                rank = stats["by_type"]["ranks"][metric].get(group)
                cells.append(_format_cell(summary[measure], rank) if summary else "-")
            rows.append([group, *cells])
        _render_grid(rows, out)
    return out.getvalue()


def render_stats_csv(stats: dict) -> str:
    out = io.StringIO()
    metrics = stats["metrics"]
    out.write("section,group,measure," + ",".join(metrics) + "\n")
    for measure in MEASURES:
        for group in ("SATD", NON_SATD):
            cells = []
            for metric in metrics:
                summary = stats["satd_vs_nonsatd"]["summary"][metric].get(group)
                cells.append("" if summary is None else repr(summary[measure]))
            out.write(f"satd_vs_nonsatd,{group},{measure}," + ",".join(cells) + "\n")
    for test in ("p_two_sided", "cliffs_delta"):
        cells = []
        for metric in metrics:
            value = stats["satd_vs_nonsatd"]["tests"][metric][test]
            cells.append("" if value is None else repr(value))
        out.write(f"satd_vs_nonsatd,,{test}," + ",".join(cells) + "\n")
    groups = []
    for metric in metrics:
        for g in stats["by_type"]["summary"][metric]:
            if g not in groups:
                groups.append(g)
    for measure in MEASURES:
        for group in groups:
            cells = []
            for metric in metrics:
                summary = stats["by_type"]["summary"][metric].get(group)
                rank = stats["by_type"]["ranks"][metric].get(group)
                cells.append("" if summary is None else f"{summary[measure]!r}({rank})")
            out.write(f"by_type,{group},{measure}," + ",".join(cells) + "\n")
    return out.getvalue()


def render_report_text(report: dict) -> str:
    out = io.StringIO()
    targets = report["targets"]
    rows = [["approach", *targets, "average"]]
    for approach in report["approaches"]:
        cells = []
        for t in targets:
            rank = report["ranks"][t][approach]
            cells.append(_format_cell(report["rmse"][approach][t], rank))
        cells.append(_format_cell(report["average_rmse"][approach]))
        rows.append([approach, *cells])
    out.write(f"test records: {report['n']}  seed: {report['seed']}\n")
    _render_grid(rows, out)
    return out.getvalue()


def render_report_csv(report: dict) -> str:
    out = io.StringIO()
    targets = report["targets"]
    out.write("approach," + ",".join(targets) + ",average\n")
    for approach in report["approaches"]:
        cells = [repr(report["rmse"][approach][t]) for t in targets]
        cells.append(repr(report["average_rmse"][approach]))
        out.write(approach + "," + ",".join(cells) + "\n")
    return out.getvalue()


def render_keywords_text(reports: list[dict]) -> str:
    out = io.StringIO()
    for report in reports:
        out.write(f"== {report['direction']} ({report['target']}) ==\n")
        rows = [["ngram", "n", "score", "count"]]
        for entry in report["entries"]:
            rows.append(
                [entry["ngram"], str(entry["n"]), f"{entry['score']:.4f}", str(entry["count"])]
            )
        _render_grid(rows, out)
        out.write("\n")
    return out.getvalue()
