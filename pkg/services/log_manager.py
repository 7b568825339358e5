"""
The logging module.
"""
from pathlib import Path
from typing import Union

import orjson # type: ignore

from models.log_models import LogEntry


class LogManager:
    """
    Appends run logs to a JSON-lines file in a structured format.
    """

    def log(self, path: Union[str, Path], log_data: LogEntry) -> None:
        """
        Appends one structured log entry.

        Args:
            path: The JSON-lines file; its directory must already exist.
            log_data: A Pydantic model instance (SuccessRunLog or FailureRunLog)
                      containing the structured data to be logged.
        """
        try:
            log_dict = log_data.model_dump(exclude_none=True)
            with open(path, "ab") as fh:
                fh.write(orjson.dumps(log_dict) + b"\n")
        except Exception as e:
            print(f"--- Run logging failed: {e} ---")
