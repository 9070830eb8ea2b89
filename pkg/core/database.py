import duckdb
import pandas as pd
import logging
from config import settings
from pathlib import Path
from datetime import datetime, timezone

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ['run_id', 'curve_id', 'field', 'curve', 'status', 'stratum', 's', 'dim',
                  'hyperflex_count', 'I3', 'invariants', 'message', 'computed_at']


class ResultStore:
    """
    Handles interactions with the DuckDB file holding batch results.
    """

    def __init__(self, db_path: str = None):
        self.db_path = db_path or settings.DATABASE_URL
        if self.db_path != ':memory:':
            Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)
        logger.info(f"Configured for Local Database: {self.db_path}")
        self.conn = None

    def get_connection(self):
        if self.conn is None:
            self.conn = duckdb.connect(self.db_path)
            self._initialize_tables()
        return self.conn

    def _initialize_tables(self):
        self.conn.execute("""
            CREATE TABLE IF NOT EXISTS results (
                run_id VARCHAR,
                curve_id VARCHAR,
                field VARCHAR,
                curve VARCHAR,
                status VARCHAR,
                stratum VARCHAR,
                s INTEGER,
                dim INTEGER,
                hyperflex_count INTEGER,
                I3 VARCHAR,
                invariants VARCHAR,
                message VARCHAR,
                computed_at TIMESTAMP,
                PRIMARY KEY (run_id, curve_id)
            )
        """)

    def save_dataframe(self, df: pd.DataFrame, run_id: str = None) -> int:
        if df.empty:
            return 0
        df = df.copy()
        df['run_id'] = run_id or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
        df['computed_at'] = datetime.now(timezone.utc).replace(tzinfo=None)
        for col in RESULT_COLUMNS:
            if col not in df.columns:
                df[col] = None
        df = df[RESULT_COLUMNS]
        # nullable integer columns survive missing values without turning into floats
        for col in ('s', 'dim', 'hyperflex_count'):
            df[col] = df[col].astype('Int64')

        conn = self.get_connection()
        conn.register('df_view', df)
        try:
            conn.execute("INSERT OR IGNORE INTO results SELECT * FROM df_view")
            logger.info(f"Successfully stored {len(df)} rows in results.")
            return len(df)
        except Exception as e:
            logger.error(f"Failed to save to results: {e}")
            return 0
        finally:
            conn.unregister('df_view')

    def load_results(self, run_id: str = None) -> pd.DataFrame:
        conn = self.get_connection()
        if run_id:
            return conn.execute("SELECT * FROM results WHERE run_id = ? ORDER BY curve_id", [run_id]).df()
        return conn.execute("SELECT * FROM results ORDER BY computed_at, curve_id").df()

    def close(self):
        if self.conn:
            self.conn.close()
            self.conn = None
