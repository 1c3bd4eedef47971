import sys
from typing import Iterable, Optional, TextIO

import pandas as pd


class PrintSink:
    """Echoes reports and small tables to the console.

    Attributes:
        limit: Number of table rows shown by :meth:`write_frame`
        stream: Output stream (stdout by default)
    """

    def __init__(self, limit: Optional[int] = 5, stream: Optional[TextIO] = None) -> None:
        self.limit = limit
        self.stream = stream

    @property
    def node_id(self) -> str:
        return "PrintSink"

    def _out(self) -> TextIO:
        return self.stream if self.stream is not None else sys.stdout

    def write_lines(self, title: str, lines: Iterable[str]) -> int:
        """Print ``lines`` between banner rows; returns how many were printed."""
        out = self._out()
        count = 0
        print(f"===== {title} =====", file=out)
        for line in lines:
            print(line, file=out)
            count += 1
        print(f"===== End of {title} =====", file=out)
        return count

    def write_frame(self, title: str, frame: pd.DataFrame) -> int:
        """Print the head of a table; returns the number of rows shown."""
        shown = frame if self.limit is None else frame.head(self.limit)
        out = self._out()
        print(f"\n===== {title}: {len(frame)} total rows =====", file=out)
        print(shown.to_string(index=False), file=out)
        print(f"===== End of {title} =====\n", file=out)
        return len(shown)
