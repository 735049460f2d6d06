import json
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
from nora_stabilizer.config import experiment_config_schema

DIR = os.path.dirname(__file__)


def write_schema_to_file(schema: dict, file_path: str):
    with open(file_path, "w") as f:
        json.dump(obj=schema, fp=f, indent=2)
        print(os.path.abspath(f.name))


def write_config_to_file(directory=DIR):
    for schema, file_path in [
        (
            experiment_config_schema(),
            os.path.join(directory, "config_schema.json"),
        ),
    ]:
        write_schema_to_file(schema=schema, file_path=file_path)


if __name__ == "__main__":
    write_config_to_file()
