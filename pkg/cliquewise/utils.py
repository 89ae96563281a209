import csv
import io
from typing import Any, Sequence


def format_cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def export_table(
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    format: str = "csv",
) -> str:
    """Renders a table of bounds or statistics as text.

    Parameters
    ----------
    columns: sequence of str
        Column headers.
    rows: sequence of sequences
        Table body, cells are formatted with `format_cell`.
    format: 'csv', 'latex' or 'markdown'
        Output format.

    Returns
    -------
    str
        The rendered table.
    """
    body = [[format_cell(cell) for cell in row] for row in rows]
    if format == "csv":
        output = io.StringIO()
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(body)
        return output.getvalue()
    if format == "markdown":
        lines = ["| " + " | ".join(columns) + " |"]
        lines.append("|" + "|".join(["---:"] * len(columns)) + "|")
        for row in body:
            lines.append("| " + " | ".join(row) + " |")
        return "\n".join(lines)
    if format == "latex":
        alignment = "r" * len(columns)
        lines = [
            f"\\begin{{tabular}}{{{alignment}}}",
            "\\toprule",
            " & ".join(columns) + " \\\\",
            "\\midrule",
        ]
        for row in body:
            lines.append(" & ".join(row) + " \\\\")
        lines.extend(["\\bottomrule", "\\end{tabular}"])
        return "\n".join(lines)
    raise ValueError(
        f"Format '{format}' not supported for tables, "
        "please use 'markdown', 'latex' or 'csv'"
    )
