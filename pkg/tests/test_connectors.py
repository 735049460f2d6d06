import os

import pandas as pd
import pytest

from nora_stabilizer.connectors import Connector, FileSystemConnector, connector_lkp


@pytest.fixture()
def connector(output_directory):
    return Connector("file", output_directory=output_directory)


def test_connector_lookup(connector):
    assert isinstance(connector, FileSystemConnector)
    assert set(connector_lkp) == {"file"}
    with pytest.raises(KeyError):
        Connector("s3")


def test_singleton_bound_function(connector):
    assert connector.db.sql("select singleton_bound(130, 2)").fetchone()[0] == 65
    connector.load_custom_functions()
    assert connector.db.sql("select singleton_bound(6, 2)").fetchone()[0] == 3


def test_summary_with_missing_values(connector):
    frame = pd.DataFrame(
        {
            "D": [1, 1, 1, 2, 2],
            "N": [10, 10, 10, 10, 10],
            "k": [2, 2, 2, 2, 2],
            "delta_hat": pd.array([2, 4, None, 3, 3], dtype="Int64"),
        }
    )
    connector.load_measurements(frame)
    summary = connector.summarize(
        group_by=["D", "N", "k"],
        value_columns=["delta_hat"],
        extra_columns=["singleton_bound(N, k) as singleton_bound"],
    )
    assert summary["D"].tolist() == [1, 2]
    assert summary["mean_delta_hat"].tolist() == [3.0, 3.0]
    assert summary["sem_delta_hat"].tolist() == pytest.approx([1.0, 0.0])
    assert summary["count_delta_hat"].tolist() == [2, 2]
    assert summary["samples"].tolist() == [3, 2]
    assert summary["singleton_bound"].tolist() == [5, 5]


def test_written_files(connector, output_directory):
    frame = pd.DataFrame({"x": [1, 2], "y": [0.5, 0.25]})
    table = connector.write_table("example", frame, '{"seed":1}')
    with open(table, "r") as f:
        assert f.read() == '# config: {"seed":1}\nx,y\n1,0.5\n2,0.25\n'
    report = connector.write_report("example", {"b": 1, "a": [1, 2]})
    with open(report, "r") as f:
        assert f.read().startswith('{\n  "a": [\n')
    plot = connector.write_plot("example", "<svg/>")
    assert sorted(os.listdir(output_directory)) == ["example.csv", "example.json", "example.svg"]
    assert plot.endswith("example.svg")
