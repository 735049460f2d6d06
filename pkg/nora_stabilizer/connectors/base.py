from abc import ABC as AbstractBaseClass, abstractmethod
from functools import cached_property
from typing import List

import duckdb
import pandas as pd
try:
    from duckdb.sqltypes import BIGINT
except ImportError:  # duckdb < 1.4
    from duckdb.typing import BIGINT

from nora_stabilizer.analysis import singleton_bound
from nora_stabilizer.utils import nora_jinja_env

DEFAULT_TABLE_NAME = "measurements"


class BaseConnector(AbstractBaseClass):
    """
    Every connector owns a duckdb connection that collects per-sample measurements and
    aggregates them. The connection runs single-threaded so that floating point reductions are
    reproducible byte for byte.

    Subclasses decide where tables, reports and plots end up.
    """

    def __init__(self, table_name=DEFAULT_TABLE_NAME, **kwargs):
        self.table_name = table_name
        self.init_duckdb()

    def __exit__(self):
        self.duckdb_connection.close()

    @cached_property
    def duckdb_connection(self) -> duckdb.DuckDBPyConnection:
        return duckdb.connect(config={"threads": 1})

    @property
    def db(self):
        return self.duckdb_connection

    def init_duckdb(self):
        try:
            del self.duckdb_connection
        except AttributeError:
            pass
        self.load_custom_functions()

    def load_custom_functions(self):
        singleton_bound_exists_count = (
            self.db.sql(
                "from duckdb_functions() where function_name = 'singleton_bound'"
            )
            .count("*")
            .fetchone()[0]
        )
        if singleton_bound_exists_count == 1:
            self.db.remove_function("singleton_bound")
        self.db.create_function(
            "singleton_bound", singleton_bound, [BIGINT, BIGINT], BIGINT
        )

    def load_measurements(self, frame: pd.DataFrame, table_name: str = None):
        table_name = table_name or self.table_name
        self.db.register("measurements_frame", frame)
        sql = nora_jinja_env.get_template("measurements.sql").render(
            table_name=table_name, frame_name="measurements_frame"
        )
        self.db.execute(sql)
        self.db.unregister("measurements_frame")

    def summarize(
        self,
        group_by: List[str],
        value_columns: List[str],
        extra_columns: List[str] = None,
        table_name: str = None,
    ) -> pd.DataFrame:
        """
        Mean, standard error of the mean and count of each value column per group.
        ``extra_columns`` are SQL expressions over the group columns, such as
        ``singleton_bound(N, k) as singleton_bound``.
        """
        sql = nora_jinja_env.get_template("summary.sql").render(
            table_name=table_name or self.table_name,
            group_by=group_by,
            value_columns=value_columns,
            extra_columns=extra_columns or [],
        )
        return self.db.sql(sql).df()

    @abstractmethod
    def write_table(self, name: str, frame: pd.DataFrame, config_json: str) -> str:
        raise NotImplementedError("Connectors must implement a table writer")

    @abstractmethod
    def write_report(self, name: str, data: dict) -> str:
        raise NotImplementedError("Connectors must implement a report writer")

    @abstractmethod
    def write_plot(self, name: str, svg: str) -> str:
        raise NotImplementedError("Connectors must implement a plot writer")
