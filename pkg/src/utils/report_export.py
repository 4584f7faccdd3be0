"""
Report writers for the command-line front end.

Reports go to a file when --out is given and to stdout otherwise. Output is
byte-for-byte deterministic: keys keep model order, floats use repr.
"""

import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

from loguru import logger
from pydantic import BaseModel


def _plain(document: Any) -> Any:
    if isinstance(document, BaseModel):
        return document.model_dump(mode="json")
    if isinstance(document, (list, tuple)):
        return [_plain(x) for x in document]
    if isinstance(document, dict):
        return {str(k): _plain(v) for k, v in document.items()}
    return document


class ReportExporter:
    """Render JSON and CSV reports"""

    def render_json(self, document: Any) -> str:
        return json.dumps(_plain(document), indent=2, ensure_ascii=False) + "\n"

    def render_csv(
        self,
        header: Sequence[str],
        rows: Iterable[Sequence[str]],
        comments: Optional[List[str]] = None,
    ) -> str:
        """CSV body followed by '# '-prefixed comment lines"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
        for line in comments or []:
            buffer.write(f"# {line}\n")
        return buffer.getvalue()

    def write(self, text: str, out: Optional[Path]) -> None:
        if out is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        logger.info(f"Report written to {out}")


_report_exporter: Optional[ReportExporter] = None


def get_report_exporter() -> ReportExporter:
    """Get or create the global report exporter instance"""
    global _report_exporter

    if _report_exporter is None:
        _report_exporter = ReportExporter()

    return _report_exporter
