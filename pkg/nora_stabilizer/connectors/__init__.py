from nora_stabilizer.connectors.base import BaseConnector, DEFAULT_TABLE_NAME  # noqa:F401
from nora_stabilizer.connectors.file_system import FileSystemConnector
from typing import Literal


connector_lkp = {"file": FileSystemConnector}


def Connector(connection_type: Literal["file"] = "file", **parameters: dict) -> BaseConnector:
    try:
        connector = connector_lkp[connection_type]
    except KeyError:
        raise KeyError(f"Invalid connector type: {connection_type}")
    return connector(**parameters)
