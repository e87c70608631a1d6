"""Text and figure rendering for retrieval reports.

The text format is one summary line
"P@1 <value> P@5 <value> P@10 <value> queries <n>" followed by optional
per-query lines "src -> predicted [correct|wrong] (references...)".
The figure path draws precision-at-k curves per method.
"""

from __future__ import annotations

import os

from .corpus import BilingualLexicon
from .retrieval import RetrievalReport


def summary_line(report: RetrievalReport) -> str:
    parts = [f"P@{k} {report.p_at_k[k]:.4f}" for k in sorted(report.p_at_k)]
    parts.append(f"queries {report.n_queries}")
    return " ".join(parts)


def per_query_lines(report: RetrievalReport, lex: BilingualLexicon) -> list[str]:
    groups = lex.grouped()
    lines = []
    for q in report.per_query:
        predicted = q.candidates[0][0] if q.candidates else "-"
        verdict = "correct" if q.correct else "wrong"
        refs = ", ".join(groups.get(q.source, []))
        lines.append(f"{q.source} -> {predicted} [{verdict}] ({refs})")
    return lines


def format_report(
    report: RetrievalReport, lex: BilingualLexicon | None = None, per_query: bool = False
) -> str:
    lines = [summary_line(report)]
    if per_query and lex is not None:
        lines.extend(per_query_lines(report, lex))
    return "\n".join(lines) + "\n"


def render_pk_figure(reports: dict[str, RetrievalReport], path: str | os.PathLike) -> None:
    """Precision-at-k curves, one per labelled report, saved to `path`."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for label, report in reports.items():
        ks = sorted(report.p_at_k)
        ax.plot(ks, [report.p_at_k[k] for k in ks], marker="o", label=label)
    ax.set_xlabel("k")
    ax.set_ylabel("P@k")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
