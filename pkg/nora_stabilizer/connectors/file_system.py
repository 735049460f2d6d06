import json
import os

import pandas as pd

from nora_stabilizer.connectors.base import BaseConnector
from nora_stabilizer.utils import get_logger

logger = get_logger()

CONFIG_COMMENT_PREFIX = "# config: "


class FileSystemConnector(BaseConnector):
    def __init__(self, output_directory: str = "output", **kwargs):
        super().__init__(**kwargs)
        self.output_directory = output_directory

    def _path(self, file_name: str) -> str:
        os.makedirs(self.output_directory, exist_ok=True)
        return os.path.join(self.output_directory, file_name)

    def write_table(self, name: str, frame: pd.DataFrame, config_json: str) -> str:
        """CSV whose first line is a comment holding the full configuration."""
        file_path = self._path(f"{name}.csv")
        with open(file_path, "w", encoding="utf-8", newline="") as file:
            file.write(f"{CONFIG_COMMENT_PREFIX}{config_json}\n")
            frame.to_csv(file, index=False, lineterminator="\n")
        logger.info(f"Wrote {len(frame)} rows to {file_path}")
        return file_path

    def write_report(self, name: str, data: dict) -> str:
        file_path = self._path(f"{name}.json")
        with open(file_path, "w", encoding="utf-8", newline="") as file:
            file.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
        logger.info(f"Wrote {file_path}")
        return file_path

    def write_plot(self, name: str, svg: str) -> str:
        file_path = self._path(f"{name}.svg")
        with open(file_path, "w", encoding="utf-8", newline="") as file:
            file.write(svg)
        logger.info(f"Wrote {file_path}")
        return file_path
