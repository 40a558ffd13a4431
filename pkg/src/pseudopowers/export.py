"""Plain-text table writers shared by the library and the CLI."""

import csv
import io
import json


def fmt_real(x) -> str:
    # 17 significant digits round-trips any float64
    return format(float(x), ".17g")


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_real(v)
    if hasattr(v, "dtype"):
        return fmt_real(v) if v.dtype.kind == "f" else str(v)
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    text = csv_text(header, rows)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(text)
    return text


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
