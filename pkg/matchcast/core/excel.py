from __future__ import annotations

from io import BytesIO
from numbers import Integral, Real
from typing import Any, Iterable, Sequence, cast

from openpyxl import Workbook
from openpyxl.styles import Font
from openpyxl.utils import get_column_letter
from openpyxl.worksheet.worksheet import Worksheet

Sheet = tuple[list[str], Iterable[Sequence[Any]]]

FLOAT_FORMAT = "0.000000"
MAX_WIDTH = 45


def _cell_value(v: Any) -> Any:
    # numpy-скаляры -> обычные python-числа
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, Integral):
        return int(v)
    if isinstance(v, Real):
        return float(v)
    return str(v)


def _autosize_columns(ws: Worksheet) -> None:
    for col in range(1, ws.max_column + 1):
        letter = get_column_letter(col)
        widths = [len(str(c.value)) for c in ws[letter] if c.value is not None]
        ws.column_dimensions[letter].width = min(max(widths, default=0) + 2, MAX_WIDTH)


def _fill(ws: Worksheet, title: str, headers: list[str], rows: Iterable[Sequence[Any]]) -> None:
    ws.title = title[:31]            # Excel ограничение на имя листа
    ws.append(list(headers))
    for cell in ws[1]:
        cell.font = Font(bold=True)
    for r in rows:
        ws.append([_cell_value(v) for v in r])
    for row in ws.iter_rows(min_row=2):
        for cell in row:
            if isinstance(cell.value, float):
                cell.number_format = FLOAT_FORMAT
    ws.freeze_panes = "A2"
    _autosize_columns(ws)


def make_workbook(sheets: dict[str, Sheet]) -> bytes:
    """
    Создаёт Excel-файл (xlsx) в памяти и возвращает bytes.
    sheets: имя листа -> (заголовки, строки); порядок листов = порядок словаря.
    """
    if not sheets:
        raise ValueError("at least one sheet is required")
    wb = Workbook()
    items = list(sheets.items())
    first_title, (headers, rows) = items[0]
    _fill(cast(Worksheet, wb.active), first_title, headers, rows)
    for title, (headers, rows) in items[1:]:
        _fill(wb.create_sheet(), title, headers, rows)

    bio = BytesIO()
    wb.save(bio)
    return bio.getvalue()
