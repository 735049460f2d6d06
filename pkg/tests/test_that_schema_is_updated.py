import json
import os

from nora_stabilizer.cli import main


def test_that_schema_generation_is_stable(tmp_path, capsys):
    from schemas.generate import write_config_to_file

    first, second = tmp_path / "first", tmp_path / "second"
    first.mkdir()
    second.mkdir()
    write_config_to_file(directory=str(first))
    write_config_to_file(directory=str(second))
    with open(os.path.join(first, "config_schema.json"), "r") as f:
        data = f.read()
    with open(os.path.join(second, "config_schema.json"), "r") as f:
        new_data = f.read()
    assert data == new_data
    capsys.readouterr()

    assert main(["schema"]) == 0
    assert json.loads(capsys.readouterr().out) == json.loads(data)
